use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::predict::{Attacker, BreachPrediction};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackStatus {
    /// Recovered and, when ground truth was supplied, within tolerance.
    Solved,
    /// Fewer equations than unknowns; the solver was not run.
    Underdetermined,
    /// Several starts reached zero residual at different points.
    Ambiguous,
    /// No start reached the residual tolerance.
    NotConverged,
    /// Unique zero-residual solution that does not match the ground truth.
    Mismatch,
    /// The attacker lacks what the attack needs (unknown masks, singular system).
    Inconclusive,
}

impl AttackStatus {
    pub fn name(self) -> &'static str {
        match self {
            AttackStatus::Solved => "solved",
            AttackStatus::Underdetermined => "underdetermined",
            AttackStatus::Ambiguous => "ambiguous",
            AttackStatus::NotConverged => "not_converged",
            AttackStatus::Mismatch => "mismatch",
            AttackStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreachReport {
    /// e.g. `admm_owner`, `admm_central`, `linear_algebra_protocol`
    pub attack: String,
    pub attacker: Attacker,
    pub noise: String,
    pub prediction: Option<BreachPrediction>,
    pub iterations_used: usize,
    pub equations: u128,
    /// Unknowns without the lag ties, as in the closed-form counts.
    pub unknowns: u128,
    /// Unknowns after the lag ties, i.e. the solver's parameter count.
    pub structured_unknowns: u128,
    pub status: AttackStatus,
    pub solved: bool,
    /// Max absolute error on the recovered private values, if ground truth was given.
    pub reconstruction_error: Option<f64>,
    pub residual: Option<f64>,
    pub starts: usize,
    pub converged_starts: usize,
    pub distinct_solutions: usize,
    pub detail: String,
    /// `(series index, recovered values)` from the best start.
    #[serde(skip)]
    pub recovered: Vec<(usize, Vec<f64>)>,
}

impl BreachReport {
    /// Share of converged starts that landed away from the reported solution.
    pub fn ambiguity_rate(&self) -> f64 {
        if self.converged_starts == 0 {
            0.0
        } else {
            (self.distinct_solutions.saturating_sub(1)) as f64 / self.converged_starts as f64
        }
    }
}

impl fmt::Display for BreachReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, noise {}): {} after {} iterations; {} equations vs {} unknowns ({} with lag ties)",
            self.attack,
            self.attacker.name(),
            self.noise,
            self.status.name(),
            self.iterations_used,
            self.equations,
            self.unknowns,
            self.structured_unknowns,
        )?;
        if let Some(p) = &self.prediction {
            write!(f, "; predicted k = {}", p.k_display())?;
        }
        if let Some(e) = self.reconstruction_error {
            write!(f, "; reconstruction error {e:.3e}")?;
        }
        if let Some(r) = self.residual {
            write!(f, "; residual {r:.3e}")?;
        }
        if self.starts > 0 {
            write!(
                f,
                "; {}/{} starts converged, {} distinct",
                self.converged_starts, self.starts, self.distinct_solutions
            )?;
        }
        if !self.detail.is_empty() {
            write!(f, "; {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ReportRow<'a> {
    attack: &'a str,
    attacker: &'static str,
    noise: &'a str,
    #[serde(rename = "T")]
    t: Option<u64>,
    n: Option<u64>,
    p: Option<u64>,
    k_predicted: String,
    iterations_used: usize,
    equations: String,
    unknowns: String,
    structured_unknowns: String,
    status: &'static str,
    solved: bool,
    reconstruction_error: Option<f64>,
    residual: Option<f64>,
    starts: usize,
    converged_starts: usize,
    distinct_solutions: usize,
    detail: &'a str,
}

/// One CSV row per report.
pub fn write_reports_csv<W: Write>(reports: &[BreachReport], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in reports {
        wtr.serialize(ReportRow {
            attack: &r.attack,
            attacker: r.attacker.name(),
            noise: &r.noise,
            t: r.prediction.map(|p| p.t),
            n: r.prediction.map(|p| p.n),
            p: r.prediction.map(|p| p.p),
            k_predicted: r.prediction.map(|p| p.k_display()).unwrap_or_default(),
            iterations_used: r.iterations_used,
            equations: r.equations.to_string(),
            unknowns: r.unknowns.to_string(),
            structured_unknowns: r.structured_unknowns.to_string(),
            status: r.status.name(),
            solved: r.solved,
            reconstruction_error: r.reconstruction_error,
            residual: r.residual,
            starts: r.starts,
            converged_starts: r.converged_starts,
            distinct_solutions: r.distinct_solutions,
            detail: &r.detail,
        })?;
    }
    wtr.flush()?;
    Ok(())
}
