//! Run configuration: a TOML tree, one table per subcommand, overridden by
//! command-line flags and echoed in full to the run manifest.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub seed: u64,
    pub simulate: SimulateConfig,
    pub fit: FitConfig,
    pub protocol: ProtocolConfig,
    pub attack: AttackConfig,
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    /// `var2`, `var10` or `random`.
    pub scenario: String,
    #[serde(rename = "T")]
    pub t: usize,
    /// Series and lag count for `random`.
    pub n: usize,
    pub p: usize,
    pub burn_in: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            scenario: "var2".into(),
            t: 20_000,
            n: 2,
            p: 2,
            burn_in: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub data: Option<PathBuf>,
    pub lags: Vec<usize>,
    /// `distributed`, `central`, `ls` or `ridge`.
    pub estimator: String,
    pub lambda: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// `none`, `data`, `coefficients` or `intermediate`.
    pub noise_placement: String,
    /// `laplace`, `gaussian` or `uniform`.
    pub noise_family: String,
    pub noise_b: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: None,
            lags: vec![1, 2],
            estimator: "distributed".into(),
            lambda: 1.0,
            rho: 1.0,
            max_iter: 50,
            tol: 1e-6,
            noise_placement: "none".into(),
            noise_family: "laplace".into(),
            noise_b: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    /// `two-party`, `commodity`, `inverse`, `karr` or `ridge`.
    pub demo: String,
    pub m: usize,
    pub k: usize,
    pub s: usize,
    /// Karr projection width; the balancing value when absent.
    pub g: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            demo: "karr".into(),
            m: 100,
            k: 5,
            s: 5,
            g: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// `predict`, `grid`, `admm` or `protocol`.
    pub mode: String,
    /// `central` or `owner`.
    pub attacker: String,
    #[serde(rename = "T")]
    pub t: u64,
    pub n: u64,
    pub p: u64,
    /// ADMM iterations run before the transcript is attacked; the predicted
    /// breach point when absent.
    pub iterations: Option<usize>,
    pub starts: usize,
    pub lambda: f64,
    /// `none`, `coefficients` or `intermediate`.
    pub noise_placement: String,
    pub noise_b: f64,
    pub grid_t: Vec<u64>,
    pub grid_n: Vec<u64>,
    pub grid_p: Vec<u64>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            mode: "predict".into(),
            attacker: "owner".into(),
            t: 30,
            n: 2,
            p: 1,
            iterations: None,
            starts: 20,
            lambda: 0.5,
            noise_placement: "none".into(),
            noise_b: 0.3,
            grid_t: (1..=10).map(|i| 500 * i).collect(),
            grid_n: (2..=20).collect(),
            grid_p: (1..=8).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// `var2`, `var10`, `random-var2`, `random-var10` or `solar`.
    pub scenario: String,
    pub data: Option<PathBuf>,
    pub replications: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub noise_b: Option<Vec<f64>>,
    pub max_iter: Option<usize>,
    pub lambda: Option<f64>,
    /// `parallel` or `sequential`.
    pub execution: String,
    pub boxplots: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scenario: "var2".into(),
            data: None,
            replications: None,
            t: None,
            noise_b: None,
            max_iter: None,
            lambda: None,
            execution: "parallel".into(),
            boxplots: true,
        }
    }
}

const SCENARIOS: &[&str] = &["var2", "var10", "random"];
const ESTIMATORS: &[&str] = &["distributed", "central", "ls", "ridge"];
const FIT_NOISE: &[&str] = &["none", "data", "coefficients", "intermediate"];
const FAMILIES: &[&str] = &["laplace", "gaussian", "uniform"];
const DEMOS: &[&str] = &["two-party", "commodity", "inverse", "karr", "ridge"];
const ATTACK_MODES: &[&str] = &["predict", "grid", "admm", "protocol"];
const ATTACKERS: &[&str] = &["central", "owner"];
const ATTACK_NOISE: &[&str] = &["none", "coefficients", "intermediate"];
const BENCH_SCENARIOS: &[&str] = &["var2", "var10", "random-var2", "random-var10", "solar"];
const EXECUTIONS: &[&str] = &["parallel", "sequential"];

fn one_of(out: &mut Vec<String>, field: &str, value: &str, allowed: &[&str]) {
    if !allowed.contains(&value) {
        out.push(format!(
            "{field}: `{value}` is not one of {}",
            allowed.join(", ")
        ));
    }
}

fn positive(out: &mut Vec<String>, field: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(format!("{field}: must be positive and finite, got {v}"));
    }
}

fn non_negative(out: &mut Vec<String>, field: &str, v: f64) {
    if !(v >= 0.0 && v.is_finite()) {
        out.push(format!("{field}: must be finite and >= 0, got {v}"));
    }
}

pub fn check_lags(out: &mut Vec<String>, field: &str, lags: &[usize]) {
    if lags.is_empty() {
        out.push(format!("{field}: at least one lag is required"));
    } else if lags[0] == 0 {
        out.push(format!("{field}: lags start at 1, got 0"));
    } else if lags.windows(2).any(|w| w[1] <= w[0]) {
        out.push(format!(
            "{field}: lags must be strictly increasing, got {lags:?}"
        ));
    }
}

impl Config {
    pub fn problems(&self, subcommand: &str) -> Vec<String> {
        let mut out = Vec::new();
        match subcommand {
            "simulate" => {
                let s = &self.simulate;
                one_of(&mut out, "simulate.scenario", &s.scenario, SCENARIOS);
                if s.t == 0 {
                    out.push("simulate.T: must be at least 1".into());
                }
                if s.scenario == "random" {
                    if s.n == 0 {
                        out.push("simulate.n: must be at least 1".into());
                    }
                    if s.p == 0 {
                        out.push("simulate.p: the lag order must be at least 1".into());
                    }
                }
            }
            "fit" => {
                let f = &self.fit;
                match &f.data {
                    None => out.push("fit.data: a panel CSV is required".into()),
                    Some(p) if !p.is_file() => out.push(format!(
                        "fit.data: `{}` is not a readable file",
                        p.display()
                    )),
                    _ => {}
                }
                check_lags(&mut out, "fit.lags", &f.lags);
                one_of(&mut out, "fit.estimator", &f.estimator, ESTIMATORS);
                one_of(
                    &mut out,
                    "fit.noise_placement",
                    &f.noise_placement,
                    FIT_NOISE,
                );
                one_of(&mut out, "fit.noise_family", &f.noise_family, FAMILIES);
                if matches!(f.noise_placement.as_str(), "coefficients" | "intermediate")
                    && f.estimator != "distributed"
                {
                    out.push(format!(
                        "fit.noise_placement: `{}` needs the distributed estimator",
                        f.noise_placement
                    ));
                }
                non_negative(&mut out, "fit.lambda", f.lambda);
                if f.estimator == "ridge" {
                    positive(&mut out, "fit.lambda", f.lambda);
                }
                positive(&mut out, "fit.rho", f.rho);
                positive(&mut out, "fit.tol", f.tol);
                non_negative(&mut out, "fit.noise_b", f.noise_b);
                if f.max_iter == 0 {
                    out.push("fit.max_iter: must be at least 1".into());
                }
            }
            "protocol" => {
                let p = &self.protocol;
                one_of(&mut out, "protocol.demo", &p.demo, DEMOS);
                for (name, v) in [("m", p.m), ("k", p.k), ("s", p.s)] {
                    if v == 0 {
                        out.push(format!("protocol.{name}: must be at least 1"));
                    }
                }
                if p.demo == "two-party" && p.s % 2 == 1 {
                    out.push(format!(
                        "protocol.s: the two-party product needs an even inner dimension, got {}",
                        p.s
                    ));
                }
                if p.demo == "inverse" && p.m % 2 == 1 {
                    out.push(format!(
                        "protocol.m: the inverse demo needs an even dimension, got {}",
                        p.m
                    ));
                }
                if p.demo == "karr" {
                    if p.m <= p.k {
                        out.push(format!("protocol.m: must exceed k = {}, got {}", p.k, p.m));
                    } else if let Some(g) = p.g {
                        if g > p.m - p.k {
                            out.push(format!(
                                "protocol.g: at most m - k = {}, got {g}",
                                p.m - p.k
                            ));
                        }
                    }
                }
            }
            "attack" => {
                let a = &self.attack;
                one_of(&mut out, "attack.mode", &a.mode, ATTACK_MODES);
                one_of(&mut out, "attack.attacker", &a.attacker, ATTACKERS);
                one_of(
                    &mut out,
                    "attack.noise_placement",
                    &a.noise_placement,
                    ATTACK_NOISE,
                );
                match a.mode.as_str() {
                    "predict" | "admm" => {
                        if a.n == 0 || a.p == 0 {
                            out.push("attack.n / attack.p: must be at least 1".into());
                        } else if a.t <= a.n * a.p {
                            out.push(format!(
                                "attack.T: must exceed n * p = {}, got {}",
                                a.n * a.p,
                                a.t
                            ));
                        }
                    }
                    "grid" => {
                        for (name, v) in [
                            ("grid_t", &a.grid_t),
                            ("grid_n", &a.grid_n),
                            ("grid_p", &a.grid_p),
                        ] {
                            if v.is_empty() || v.contains(&0) {
                                out.push(format!(
                                    "attack.{name}: must be a non-empty list of positive integers"
                                ));
                            }
                        }
                    }
                    "protocol" => {
                        if a.t % 2 == 1 || a.t < 2 * a.p {
                            out.push(format!(
                                "attack.T: the protocol attack needs an even T >= 2p, got {}",
                                a.t
                            ));
                        }
                        if a.n != 2 {
                            out.push(format!(
                                "attack.n: the protocol attack involves two owners, got {}",
                                a.n
                            ));
                        }
                    }
                    _ => {}
                }
                if a.mode == "admm" {
                    if a.starts == 0 {
                        out.push("attack.starts: must be at least 1".into());
                    }
                    non_negative(&mut out, "attack.lambda", a.lambda);
                    non_negative(&mut out, "attack.noise_b", a.noise_b);
                    if a.attacker == "central" && a.noise_placement != "none" {
                        out.push("attack.noise_placement: noisy transcripts are attacked from an owner's view only".into());
                    }
                    if a.iterations == Some(0) {
                        out.push("attack.iterations: must be at least 1".into());
                    }
                }
            }
            "bench" => {
                let b = &self.bench;
                one_of(&mut out, "bench.scenario", &b.scenario, BENCH_SCENARIOS);
                one_of(&mut out, "bench.execution", &b.execution, EXECUTIONS);
                if b.scenario == "solar" {
                    match &b.data {
                        None => {
                            out.push("bench.data: the solar scenario needs the plant CSV".into())
                        }
                        Some(p) if !p.is_file() => out.push(format!(
                            "bench.data: `{}` is not a readable file",
                            p.display()
                        )),
                        _ => {}
                    }
                }
                if let Some(bs) = &b.noise_b {
                    for (i, v) in bs.iter().enumerate() {
                        non_negative(&mut out, &format!("bench.noise_b[{i}]"), *v);
                    }
                }
                if let Some(l) = b.lambda {
                    non_negative(&mut out, "bench.lambda", l);
                }
            }
            _ => {}
        }
        out
    }
}

/// Reads a config file. Type errors are collected per section and unknown
/// keys per path, so one pass reports every problem in the file.
/// Fields that parsed are kept; the default stands in for the rest.
pub fn load(path: &Path) -> (Config, Vec<String>) {
    match read_table(path) {
        Ok(table) => from_table_partial(&table),
        Err(e) => (Config::default(), e),
    }
}

fn read_table(path: &Path) -> Result<Table, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("config: cannot read `{}`: {e}", path.display())])?;
    let table: Table = if path.extension().is_some_and(|e| e == "json") {
        let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            vec![format!(
                "config: `{}` is not valid JSON: {e}",
                path.display()
            )]
        })?;
        // a run manifest carries its resolved config under `config`
        let mut inner = json.get("config").cloned().unwrap_or(json);
        strip_nulls(&mut inner);
        serde_json::from_value(inner).map_err(|e| vec![format!("config: {e}")])?
    } else {
        text.parse()
            .map_err(|e: toml::de::Error| vec![format!("config: {}", e.message())])?
    };
    Ok(table)
}

/// Unset options appear as `null` in JSON; TOML has no null, so drop them.
fn strip_nulls(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.retain(|_, x| !x.is_null());
            map.values_mut().for_each(strip_nulls);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_nulls),
        _ => {}
    }
}

fn from_table_partial(table: &Table) -> (Config, Vec<String>) {
    let mut errors = Vec::new();
    let mut cfg = Config::default();
    if let Some(v) = table.get("seed") {
        match v.as_integer() {
            Some(i) if i >= 0 => cfg.seed = i as u64,
            _ => errors.push(format!("seed: expected a non-negative integer, got {v}")),
        }
    }
    section(table, "simulate", &mut cfg.simulate, &mut errors);
    section(table, "fit", &mut cfg.fit, &mut errors);
    section(table, "protocol", &mut cfg.protocol, &mut errors);
    section(table, "attack", &mut cfg.attack, &mut errors);
    section(table, "bench", &mut cfg.bench, &mut errors);
    if let Ok(Value::Table(known)) = Value::try_from(&cfg) {
        unknown_keys(table, &known, "", &mut errors);
    }
    (cfg, errors)
}

fn section<T: DeserializeOwned>(table: &Table, name: &str, slot: &mut T, errors: &mut Vec<String>) {
    let Some(v) = table.get(name) else { return };
    if !v.is_table() {
        errors.push(format!("{name}: expected a table"));
        return;
    }
    // one key at a time, so a bad field does not hide the next one
    let entries = v.as_table().unwrap();
    let mut good = Table::new();
    for (k, val) in entries {
        let mut probe = Table::new();
        probe.insert(k.clone(), val.clone());
        match T::deserialize(Value::Table(probe)) {
            Ok(_) => {
                good.insert(k.clone(), val.clone());
            }
            Err(e) => errors.push(format!("{name}.{k}: {}", e.message().trim())),
        }
    }
    match T::deserialize(Value::Table(good)) {
        Ok(v) => *slot = v,
        Err(e) => errors.push(format!("{name}: {}", e.message().trim())),
    }
}

fn unknown_keys(given: &Table, known: &Table, prefix: &str, errors: &mut Vec<String>) {
    for (k, v) in given {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match known.get(k) {
            None if prefix.is_empty() || !is_optional_field(&path) => {
                errors.push(format!("{path}: unknown key"))
            }
            Some(Value::Table(inner)) => {
                if let Value::Table(g) = v {
                    unknown_keys(g, inner, &path, errors);
                }
            }
            _ => {}
        }
    }
}

/// Option fields that serialize to nothing when unset.
fn is_optional_field(path: &str) -> bool {
    matches!(
        path,
        "fit.data"
            | "protocol.g"
            | "attack.iterations"
            | "bench.data"
            | "bench.replications"
            | "bench.T"
            | "bench.noise_b"
            | "bench.max_iter"
            | "bench.lambda"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Config, Vec<String>> {
        let (cfg, errors) = from_table_partial(&s.parse().unwrap());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(errors)
        }
    }

    #[test]
    fn defaults_and_overrides() {
        let c = parse("seed = 7\n[simulate]\nT = 100\nscenario = \"var10\"\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.simulate.t, 100);
        assert_eq!(c.simulate.scenario, "var10");
        assert_eq!(c.fit, FitConfig::default());
    }

    #[test]
    fn every_problem_is_listed() {
        let errs = parse(
            "[fit]\nlags = \"x\"\nrho = \"y\"\nbogus = 1\n[protocol]\nm = -1\n[nope]\na = 1\n",
        )
        .unwrap_err();
        for needle in ["fit.lags", "fit.rho", "fit.bogus", "protocol.m", "nope"] {
            assert!(
                errs.iter().any(|e| e.starts_with(needle)),
                "{needle} missing from {errs:?}"
            );
        }
    }

    #[test]
    fn optional_keys_are_known() {
        let c = parse("[bench]\nreplications = 3\nT = 500\n[protocol]\ng = 4\n").unwrap();
        assert_eq!(c.bench.replications, Some(3));
        assert_eq!(c.protocol.g, Some(4));
    }

    #[test]
    fn semantic_problems() {
        let mut c = Config::default();
        c.fit.lags = vec![2, 1];
        c.fit.estimator = "magic".into();
        let p = c.problems("fit");
        assert!(p.iter().any(|e| e.starts_with("fit.lags")));
        assert!(p.iter().any(|e| e.starts_with("fit.estimator")));
        assert!(p.iter().any(|e| e.starts_with("fit.data")));
        assert!(Config::default().problems("simulate").is_empty());
    }
}
