use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attacker {
    CentralNode,
    SemiTrustedOwner,
}

impl Attacker {
    pub fn name(self) -> &'static str {
        match self {
            Attacker::CentralNode => "central_node",
            Attacker::SemiTrustedOwner => "semi_trusted_owner",
        }
    }
}

impl std::str::FromStr for Attacker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" | "central_node" => Ok(Attacker::CentralNode),
            "owner" | "semi_trusted_owner" => Ok(Attacker::SemiTrustedOwner),
            other => Err(Error::param(
                "attacker",
                format!("unknown attacker `{other}`"),
            )),
        }
    }
}

/// Smallest `k` at which the attacker holds at least as many equations as
/// unknowns. `k_breach = None` means no finite `k` exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreachPrediction {
    pub attacker: Attacker,
    pub t: u64,
    pub n: u64,
    pub p: u64,
    pub k_breach: Option<u64>,
    pub equations_at_k: Option<u128>,
    pub unknowns_at_k: Option<u128>,
}

impl BreachPrediction {
    pub fn k_display(&self) -> String {
        self.k_breach
            .map_or_else(|| "inf".to_owned(), |k| k.to_string())
    }
}

/// Unknowns facing the central node after `k` iterations, per owner: `T p + p n k`.
pub fn central_unknowns(t: u64, n: u64, p: u64, k: u64) -> u128 {
    t as u128 * p as u128 + p as u128 * n as u128 * k as u128
}

/// Unknowns facing a semi-trusted owner after `k` iterations:
/// `T n + (n - 1)(k p n + T p + T)`.
pub fn owner_unknowns(t: u64, n: u64, p: u64, k: u64) -> u128 {
    let (t, n, p, k) = (t as u128, n as u128, p as u128, k as u128);
    t * n + (n - 1) * (k * p * n + t * p + t)
}

fn check_regime(t: u64, n: u64, p: u64) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidRegime {
            t,
            n,
            p,
            reason: "n and p must be positive",
        });
    }
    if t <= n * p {
        return Err(Error::InvalidRegime {
            t,
            n,
            p,
            reason: "need T > n p",
        });
    }
    Ok(())
}

fn ceil_div(num: u128, den: u128) -> u128 {
    num.div_ceil(den)
}

fn finish(attacker: Attacker, t: u64, n: u64, p: u64, k: Option<u128>) -> BreachPrediction {
    let k = k.map(|k| k.max(1) as u64);
    let equations_at_k = k.map(|k| t as u128 * n as u128 * k as u128);
    let unknowns_at_k = k.map(|k| match attacker {
        Attacker::CentralNode => central_unknowns(t, n, p, k),
        Attacker::SemiTrustedOwner => owner_unknowns(t, n, p, k),
    });
    BreachPrediction {
        attacker,
        t,
        n,
        p,
        k_breach: k,
        equations_at_k,
        unknowns_at_k,
    }
}

/// `k = ceil(T p / (T n - p n))`.
pub fn predict_breach_central(t: u64, n: u64, p: u64) -> Result<BreachPrediction> {
    check_regime(t, n, p)?;
    let (tt, nn, pp) = (t as u128, n as u128, p as u128);
    let den = tt * nn - pp * nn;
    let k = (den > 0).then(|| ceil_div(tt * pp, den));
    Ok(finish(Attacker::CentralNode, t, n, p, k))
}

/// `k = ceil((T n + (n - 1)(T p + T)) / (T n - (n - 1) p n))`, infinite when
/// the denominator is not positive.
pub fn predict_breach_owner(t: u64, n: u64, p: u64) -> Result<BreachPrediction> {
    check_regime(t, n, p)?;
    Ok(finish(
        Attacker::SemiTrustedOwner,
        t,
        n,
        p,
        owner_k(t, n, p),
    ))
}

/// Closed form without the regime gate. Under `T > n p` the denominator
/// `n (T - (n - 1) p)` is always positive.
pub(crate) fn owner_k(t: u64, n: u64, p: u64) -> Option<u128> {
    let (tt, nn, pp) = (t as i128, n as i128, p as i128);
    let num = tt * nn + (nn - 1) * (tt * pp + tt);
    let den = tt * nn - (nn - 1) * pp * nn;
    (den > 0).then(|| ceil_div(num as u128, den as u128))
}

pub fn predict_breach(attacker: Attacker, t: u64, n: u64, p: u64) -> Result<BreachPrediction> {
    match attacker {
        Attacker::CentralNode => predict_breach_central(t, n, p),
        Attacker::SemiTrustedOwner => predict_breach_owner(t, n, p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridRow {
    #[serde(rename = "T")]
    pub t: u64,
    pub n: u64,
    pub p: u64,
    pub attacker: Attacker,
    /// Empty when infinite.
    pub k: Option<u64>,
}

/// Long-format table over every `(T, n, p)` combination and both attackers;
/// invalid regimes are skipped.
pub fn breach_grid(ts: &[u64], ns: &[u64], ps: &[u64]) -> Vec<GridRow> {
    let mut rows = Vec::with_capacity(ts.len() * ns.len() * ps.len() * 2);
    for attacker in [Attacker::CentralNode, Attacker::SemiTrustedOwner] {
        for &t in ts {
            for &n in ns {
                for &p in ps {
                    if let Ok(pred) = predict_breach(attacker, t, n, p) {
                        rows.push(GridRow {
                            t,
                            n,
                            p,
                            attacker,
                            k: pred.k_breach,
                        });
                    }
                }
            }
        }
    }
    rows
}

pub fn write_grid_csv<W: Write>(rows: &[GridRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}
