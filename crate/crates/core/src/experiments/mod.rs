//! Monte Carlo studies: fixed-matrix synthetic runs, randomly generated
//! stationary models, and the solar case study. Every replication owns a seed
//! derived from the configuration seed, so tables are identical whatever the
//! execution policy.

mod metrics;
mod svg;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use metrics::{
    forecast_errors, improvement_pct, mean_sd, median, quantile, summarize_coefficients, write_csv,
    CoefficientRow, CoefficientSummary, MetricRow,
};
pub use svg::boxplot_svg;

use crate::estimators::{
    fit_lasso_admm_central, fit_lasso_admm_distributed, fit_ls, parties_from_embedding, AdmmConfig,
    DistributedConfig,
};
use crate::linalg::derive_seed;
use crate::privacy::{add_noise, NoiseFamily, NoiseSpec};
use crate::transcript::TranscriptMode;
use crate::var::{
    embed_values, fit_ar_baseline, generate_stationary_coefficients, scenarios, simulate_var,
    LagSpec, MissingPolicy, TimeSeriesPanel, VarModel,
};
use crate::{Error, Execution, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedScenario {
    Var2_2,
    Var10_3,
}

impl FixedScenario {
    pub fn model(self) -> VarModel {
        match self {
            FixedScenario::Var2_2 => scenarios::var2_2(),
            FixedScenario::Var10_3 => scenarios::var10_3(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelSource {
    Fixed {
        scenario: FixedScenario,
    },
    /// A fresh stationary model per replication.
    Generated {
        n: usize,
        lags: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSetting {
    pub family: NoiseFamily,
    pub b: f64,
}

impl NoiseSetting {
    pub fn label(&self) -> String {
        format!("{}_b{}", self.family.name(), self.b)
    }

    pub fn spec(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.family, self.b)
    }

    /// Every family at every scale.
    pub fn grid(scales: &[f64]) -> Vec<NoiseSetting> {
        NoiseFamily::ALL
            .iter()
            .flat_map(|&family| scales.iter().map(move |&b| NoiseSetting { family, b }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    DistributedAdmm,
    CentralAdmm,
    LeastSquares,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::DistributedAdmm => "distributed_admm",
            Estimator::CentralAdmm => "central_admm",
            Estimator::LeastSquares => "least_squares",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub model: ModelSource,
    pub replications: usize,
    #[serde(rename = "T")]
    pub t: usize,
    /// Lags used for fitting; defaults to the generating model's.
    pub lags: Option<LagSpec>,
    pub noise_grid: Vec<NoiseSetting>,
    pub include_clean: bool,
    pub estimator: Estimator,
    pub admm: AdmmConfig,
    /// When non-empty, `lambda` is picked on the first replication by
    /// validation MAE and frozen.
    pub lambda_grid: Vec<f64>,
    pub train_fraction: f64,
    pub seed: u64,
    pub burn_in: usize,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "var2_2".into(),
            model: ModelSource::Fixed {
                scenario: FixedScenario::Var2_2,
            },
            replications: 100,
            t: 20_000,
            lags: None,
            noise_grid: NoiseSetting::grid(&[0.2, 0.6]),
            include_clean: true,
            estimator: Estimator::DistributedAdmm,
            admm: AdmmConfig {
                max_iter: 50,
                ..AdmmConfig::default()
            },
            lambda_grid: Vec::new(),
            train_fraction: 0.8,
            seed: 0,
            burn_in: crate::var::DEFAULT_BURN_IN,
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn var10_3() -> Self {
        Self {
            scenario: "var10_3".into(),
            model: ModelSource::Fixed {
                scenario: FixedScenario::Var10_3,
            },
            ..Self::default()
        }
    }

    pub fn random_coefficients(n: usize, lags: usize) -> Self {
        Self {
            scenario: format!("random_var{n}_{lags}"),
            model: ModelSource::Generated { n, lags },
            replications: 200,
            noise_grid: vec![NoiseSetting {
                family: NoiseFamily::Laplace,
                b: 0.6,
            }],
            ..Self::default()
        }
    }

    pub fn solar() -> Self {
        Self {
            scenario: "solar".into(),
            replications: 1,
            lags: Some(LagSpec::new(vec![1, 2, 24]).expect("static lags")),
            noise_grid: vec![NoiseSetting {
                family: NoiseFamily::Laplace,
                b: 0.2,
            }],
            ..Self::default()
        }
    }

    /// Every violated constraint, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.replications == 0 {
            out.push("replications: must be at least 1".to_owned());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            out.push(format!(
                "train_fraction: must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        for (i, s) in self.noise_grid.iter().enumerate() {
            if !(s.b >= 0.0 && s.b.is_finite()) {
                out.push(format!(
                    "noise_grid[{i}].b: must be finite and >= 0, got {}",
                    s.b
                ));
            }
        }
        if let Err(e) = self.admm.validate() {
            out.push(format!("admm: {e}"));
        }
        for (i, l) in self.lambda_grid.iter().enumerate() {
            if !(*l >= 0.0 && l.is_finite()) {
                out.push(format!(
                    "lambda_grid[{i}]: must be finite and >= 0, got {l}"
                ));
            }
        }
        if let ModelSource::Generated { n, lags } = self.model {
            if n == 0 || lags == 0 {
                out.push("model: generated models need n >= 1 and lags >= 1".to_owned());
            }
        }
        let max_lag = self.lags.as_ref().map_or(3, LagSpec::max_lag);
        let train = (self.t as f64 * self.train_fraction) as usize;
        if self.t < 2 * max_lag + 4
            || train <= 2 * max_lag
            || self.t.saturating_sub(train) <= max_lag
        {
            out.push(format!(
                "T: {} rows are too few for lag {} and the train/test split",
                self.t, max_lag
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::param("experiment", p.join("; ")))
        }
    }

    fn settings(&self) -> Vec<Option<NoiseSetting>> {
        let clean = self.include_clean.then_some(None);
        clean
            .into_iter()
            .chain(self.noise_grid.iter().copied().map(Some))
            .collect()
    }

    fn model_for(&self, replication_seed: u64) -> Result<VarModel> {
        match self.model {
            ModelSource::Fixed { scenario } => Ok(scenario.model()),
            ModelSource::Generated { n, lags } => {
                generate_stationary_coefficients(n, lags, derive_seed(replication_seed, 7))
            }
        }
    }
}

fn noise_label(setting: Option<&NoiseSetting>) -> String {
    setting.map_or_else(|| "clean".to_owned(), NoiseSetting::label)
}

struct Fitted {
    b: Matrix,
    converged: bool,
    iterations: usize,
}

fn fit_var(
    values: &Matrix,
    lags: &LagSpec,
    estimator: Estimator,
    admm: &AdmmConfig,
    seed: u64,
) -> Result<Fitted> {
    let e = embed_values(values, lags)?;
    match estimator {
        Estimator::DistributedAdmm => {
            let cfg = DistributedConfig {
                admm: *admm,
                seed,
                transcript_mode: TranscriptMode::ShapesOnly,
                execution: Execution::Sequential,
                ..DistributedConfig::default()
            };
            let fit = fit_lasso_admm_distributed(&parties_from_embedding(&e), &e.y, &cfg)?;
            Ok(Fitted {
                b: fit.stacked(&e)?,
                converged: fit.converged,
                iterations: fit.iterations,
            })
        }
        Estimator::CentralAdmm => {
            let fit = fit_lasso_admm_central(&e.z, &e.y, admm)?;
            Ok(Fitted {
                iterations: fit.iterations(),
                converged: fit.converged,
                b: fit.coefficients,
            })
        }
        Estimator::LeastSquares => Ok(Fitted {
            b: fit_ls(&e.z, &e.y)?,
            converged: true,
            iterations: 0,
        }),
    }
}

/// One-step-ahead `(mae, rmse)` per series over rows `split..` of `values`,
/// for the VAR coefficients `b` and the per-series AR coefficients `ar`.
fn evaluate(
    values: &Matrix,
    split: usize,
    lags: &LagSpec,
    b: &Matrix,
    ar: &[Vec<f64>],
) -> Result<Vec<((f64, f64), (f64, f64))>> {
    let l = lags.max_lag();
    let segment = values
        .rows(split - l, values.nrows() - split + l)
        .into_owned();
    let e = embed_values(&segment, lags)?;
    let pred = &e.z * b;
    Ok((0..e.n_series)
        .map(|i| {
            let actual = e.y.column(i);
            let var = forecast_errors(pred.column(i).as_slice(), actual.as_slice());
            let ar_pred: Vec<f64> = (0..e.rows())
                .map(|t| {
                    e.owner_columns(i)
                        .iter()
                        .zip(&ar[i])
                        .map(|(&c, phi)| e.z[(t, c)] * phi)
                        .sum()
                })
                .collect();
            (var, forecast_errors(&ar_pred, actual.as_slice()))
        })
        .collect())
}

fn ar_baselines(train: &Matrix, lags: &LagSpec) -> Result<Vec<Vec<f64>>> {
    (0..train.ncols())
        .map(|i| fit_ar_baseline(train.column(i).as_slice(), lags))
        .collect()
}

/// Picks the grid value with the lowest mean validation MAE, fitting on the
/// first 80% of `train` and validating on the rest.
fn select_lambda(cfg: &ExperimentConfig, train: &Matrix, lags: &LagSpec, seed: u64) -> Result<f64> {
    if cfg.lambda_grid.is_empty() {
        return Ok(cfg.admm.lambda);
    }
    let inner = (train.nrows() as f64 * 0.8) as usize;
    if inner <= 2 * lags.max_lag() || train.nrows() - inner <= lags.max_lag() {
        return Err(Error::param(
            "lambda_grid",
            "training window too short for validation",
        ));
    }
    let fit_rows = train.rows(0, inner).into_owned();
    let ar = ar_baselines(&fit_rows, lags)?;
    let mut best = (f64::INFINITY, cfg.lambda_grid[0]);
    for &lambda in &cfg.lambda_grid {
        let admm = AdmmConfig { lambda, ..cfg.admm };
        let fit = fit_var(&fit_rows, lags, cfg.estimator, &admm, seed)?;
        let errs = evaluate(train, inner, lags, &fit.b, &ar)?;
        let mae = errs.iter().map(|((m, _), _)| m).sum::<f64>() / errs.len() as f64;
        if mae < best.0 {
            best = (mae, lambda);
        }
    }
    Ok(best.1)
}

struct Replication {
    metrics: Vec<MetricRow>,
    coefficients: Vec<CoefficientRow>,
    spectral_radius: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_on_values(
    cfg: &ExperimentConfig,
    values: &Matrix,
    owners: &[String],
    lags: &LagSpec,
    lambda: f64,
    replication: usize,
    seed: u64,
    truth: Option<&Matrix>,
) -> Result<(Vec<MetricRow>, Vec<CoefficientRow>)> {
    let split = (values.nrows() as f64 * cfg.train_fraction) as usize;
    let train = values.rows(0, split).into_owned();
    let ar = ar_baselines(&train, lags)?;
    let admm = AdmmConfig { lambda, ..cfg.admm };
    let mut metrics = Vec::new();
    let mut coefficients = Vec::new();
    for (si, setting) in cfg.settings().iter().enumerate() {
        let noise = noise_label(setting.as_ref());
        let data = match setting {
            None => train.clone(),
            Some(s) => add_noise(&train, &s.spec()?, derive_seed(seed, 100 + si as u64))?,
        };
        let fit = fit_var(
            &data,
            lags,
            cfg.estimator,
            &admm,
            derive_seed(seed, 200 + si as u64),
        )?;
        for (i, ((mae, rmse), (mae_ar, rmse_ar))) in evaluate(values, split, lags, &fit.b, &ar)?
            .into_iter()
            .enumerate()
        {
            metrics.push(MetricRow {
                scenario: cfg.scenario.clone(),
                owner: owners[i].clone(),
                replication,
                seed,
                estimator: cfg.estimator.name().to_owned(),
                noise: noise.clone(),
                mae,
                rmse,
                mae_ar,
                rmse_ar,
                mae_improvement_pct: improvement_pct(mae_ar, mae),
                rmse_improvement_pct: improvement_pct(rmse_ar, rmse),
                converged: fit.converged,
                iterations: fit.iterations,
            });
        }
        if let Some(b) = truth {
            for col in 0..b.ncols() {
                for row in 0..b.nrows() {
                    let estimate = fit.b[(row, col)];
                    coefficients.push(CoefficientRow {
                        scenario: cfg.scenario.clone(),
                        replication,
                        seed,
                        noise: noise.clone(),
                        row,
                        col,
                        truth: b[(row, col)],
                        estimate,
                        abs_diff: (estimate - b[(row, col)]).abs(),
                    });
                }
            }
        }
    }
    Ok((metrics, coefficients))
}

fn owner_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("owner{i}")).collect()
}

fn replicate(cfg: &ExperimentConfig, r: usize, lambda: Option<f64>) -> Result<Replication> {
    let seed = derive_seed(cfg.seed, r as u64);
    let model = cfg.model_for(seed)?;
    let lags = cfg.lags.clone().unwrap_or_else(|| model.lag_spec().clone());
    let n = model.n_series();
    let panel = simulate_var(&model, cfg.t, &Matrix::identity(n, n), cfg.burn_in, seed)?;
    let values = panel.values();
    let lambda = match lambda {
        Some(l) => l,
        None => {
            let split = (values.nrows() as f64 * cfg.train_fraction) as usize;
            select_lambda(cfg, &values.rows(0, split).into_owned(), &lags, seed)?
        }
    };
    // |B_hat - B| is only meaningful when the fitted lags are the model's
    let truth = (&lags == model.lag_spec()).then(|| model.coefficients().clone());
    let (metrics, coefficients) = run_on_values(
        cfg,
        values,
        &owner_names(n),
        &lags,
        lambda,
        r,
        seed,
        truth.as_ref(),
    )?;
    Ok(Replication {
        metrics,
        coefficients,
        spectral_radius: model.companion_spectral_radius(),
    })
}

#[derive(Debug, Clone)]
pub struct SyntheticOutput {
    pub metrics: Vec<MetricRow>,
    pub coefficients: Vec<CoefficientRow>,
    pub lambda: f64,
}

impl SyntheticOutput {
    pub fn coefficient_summary(&self) -> Vec<CoefficientSummary> {
        summarize_coefficients(&self.coefficients)
    }

    /// Mean `|B_hat - B|` of one replication under one noise label.
    pub fn distortion(&self, replication: usize, noise: &str) -> Option<f64> {
        let d: Vec<f64> = self
            .coefficients
            .iter()
            .filter(|c| c.replication == replication && c.noise == noise)
            .map(|c| c.abs_diff)
            .collect();
        (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
    }

    /// Per-replication [`Self::distortion`] values.
    pub fn distortions(&self, noise: &str) -> Vec<f64> {
        let reps = self
            .coefficients
            .iter()
            .map(|c| c.replication)
            .max()
            .map_or(0, |m| m + 1);
        (0..reps)
            .filter_map(|r| self.distortion(r, noise))
            .collect()
    }
}

/// Simulate, optionally add noise to the training data, fit, and compare
/// one-step forecasts on the held-out tail with per-owner AR baselines.
pub fn run_synthetic(cfg: &ExperimentConfig) -> Result<SyntheticOutput> {
    cfg.validate()?;
    let lambda = if cfg.lambda_grid.is_empty() {
        cfg.admm.lambda
    } else {
        let seed = derive_seed(cfg.seed, 0);
        let model = cfg.model_for(seed)?;
        let lags = cfg.lags.clone().unwrap_or_else(|| model.lag_spec().clone());
        let n = model.n_series();
        let panel = simulate_var(&model, cfg.t, &Matrix::identity(n, n), cfg.burn_in, seed)?;
        let split = (cfg.t as f64 * cfg.train_fraction) as usize;
        select_lambda(
            cfg,
            &panel.values().rows(0, split).into_owned(),
            &lags,
            seed,
        )?
    };
    let reps = cfg
        .execution
        .map(cfg.replications, |r| replicate(cfg, r, Some(lambda)));
    let mut metrics = Vec::new();
    let mut coefficients = Vec::new();
    for rep in reps {
        let rep = rep?;
        metrics.extend(rep.metrics);
        coefficients.extend(rep.coefficients);
    }
    Ok(SyntheticOutput {
        metrics,
        coefficients,
        lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomCoefficientSummary {
    pub scenario: String,
    pub models: usize,
    pub all_stationary: bool,
    pub max_spectral_radius: f64,
    /// Share of (model, owner) pairs where the clean VAR has lower MAE than AR.
    pub clean_beats_ar: f64,
    /// Per noise label, share of pairs where the noisy VAR has higher MAE than AR.
    pub noisy_worse_than_ar: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct RandomCoefficientOutput {
    pub metrics: Vec<MetricRow>,
    pub coefficients: Vec<CoefficientRow>,
    pub spectral_radii: Vec<f64>,
    pub summary: RandomCoefficientSummary,
}

/// One generated stationary model per replication; `lambda` is the
/// configured value (no per-model tuning).
pub fn run_random_coefficients(cfg: &ExperimentConfig) -> Result<RandomCoefficientOutput> {
    cfg.validate()?;
    if !matches!(cfg.model, ModelSource::Generated { .. }) {
        return Err(Error::param(
            "model",
            "random-coefficient runs need a generated model source",
        ));
    }
    let lambda = cfg.admm.lambda;
    let reps = cfg
        .execution
        .map(cfg.replications, |r| replicate(cfg, r, Some(lambda)));
    let mut metrics = Vec::new();
    let mut coefficients = Vec::new();
    let mut radii = Vec::new();
    for rep in reps {
        let rep = rep?;
        metrics.extend(rep.metrics);
        coefficients.extend(rep.coefficients);
        radii.push(rep.spectral_radius);
    }
    let share = |noise: &str, pred: &dyn Fn(&MetricRow) -> bool| {
        let rows: Vec<&MetricRow> = metrics.iter().filter(|m| m.noise == noise).collect();
        rows.iter().filter(|m| pred(m)).count() as f64 / rows.len().max(1) as f64
    };
    let summary = RandomCoefficientSummary {
        scenario: cfg.scenario.clone(),
        models: radii.len(),
        all_stationary: radii.iter().all(|r| *r < 1.0),
        max_spectral_radius: radii.iter().copied().fold(0.0, f64::max),
        clean_beats_ar: share("clean", &|m| m.mae < m.mae_ar),
        noisy_worse_than_ar: cfg
            .noise_grid
            .iter()
            .map(|s| {
                let label = s.label();
                let v = share(&label, &|m| m.mae > m.mae_ar);
                (label, v)
            })
            .collect(),
    };
    Ok(RandomCoefficientOutput {
        metrics,
        coefficients,
        spectral_radii: radii,
        summary,
    })
}

/// Per-plant improvements over AR on a normalized panel, clean and with each
/// configured noise setting applied to the training window.
pub fn run_solar(panel: &TimeSeriesPanel, cfg: &ExperimentConfig) -> Result<SyntheticOutput> {
    let lags = cfg
        .lags
        .clone()
        .ok_or_else(|| Error::param("lags", "the solar study needs an explicit lag list"))?;
    let cfg = ExperimentConfig {
        t: panel.len(),
        ..cfg.clone()
    };
    cfg.validate()?;
    let values = panel.values();
    let seed = derive_seed(cfg.seed, 0);
    let split = (values.nrows() as f64 * cfg.train_fraction) as usize;
    let lambda = select_lambda(&cfg, &values.rows(0, split).into_owned(), &lags, seed)?;
    let (metrics, _) = run_on_values(&cfg, values, panel.owners(), &lags, lambda, 0, seed, None)?;
    Ok(SyntheticOutput {
        metrics,
        coefficients: Vec::new(),
        lambda,
    })
}

/// [`run_solar`] on a CSV with a leading timestamp column; rows with any
/// missing value are dropped panel-wide.
pub fn run_solar_csv(path: impl AsRef<Path>, cfg: &ExperimentConfig) -> Result<SyntheticOutput> {
    let panel = TimeSeriesPanel::from_csv_path(path, MissingPolicy::DropRows)?;
    run_solar(&panel, cfg)
}

/// Improvement distributions per noise label.
pub fn improvement_boxplot(metrics: &[MetricRow], rmse: bool) -> String {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for m in metrics {
        let v = if rmse {
            m.rmse_improvement_pct
        } else {
            m.mae_improvement_pct
        };
        match groups.iter_mut().find(|(k, _)| *k == m.noise) {
            Some((_, vals)) => vals.push(v),
            None => groups.push((m.noise.clone(), vec![v])),
        }
    }
    let metric = if rmse { "RMSE" } else { "MAE" };
    boxplot_svg(
        &groups,
        &format!("{metric} improvement over AR"),
        "improvement (%)",
    )
}
