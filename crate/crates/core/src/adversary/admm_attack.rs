//! Reconstruction attacks on the distributed ADMM transcript.
//!
//! With `c = 1 / (N + rho)` and `a = rho c`, the central node's broadcast
//! after iteration `k` unrolls to
//!
//! `M^k = beta_k Y + gamma_k U^0 + sum_{m <= k} alpha_{k,m} ZB^m`,
//!
//! where `ZB^m = (1/n) sum_i Z_i B_i^m`. Each competitor's `Z_j` and `Y_j`
//! are parametrised by its single series `s_j` (the lag ties), which leaves a
//! bilinear system in `(U^0, s_j, B_j^m)` solved by multi-start
//! Levenberg-Marquardt.

use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};

use super::lm::{levenberg_marquardt, LmConfig, ResidualProblem};
use super::predict::{
    central_unknowns, owner_unknowns, predict_breach_central, predict_breach_owner, Attacker,
    BreachPrediction,
};
use super::report::{AttackStatus, BreachReport};
use crate::estimators::{NoisePlacement, BROADCAST_LABEL, PRODUCT_LABEL};
use crate::linalg::{derive_seed, pinv_solve, rng_from_seed, shape_of};
use crate::transcript::{Party, ProtocolTranscript};
use crate::var::LagEmbedding;
use crate::{Error, Execution, Matrix, Result};

/// Coefficients of the unrolled broadcast; row `k-1`, column `m-1` of `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateCoefficients {
    pub alpha: Matrix,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl UpdateCoefficients {
    pub fn new(rho: f64, big_n: f64, iterations: usize) -> Self {
        let c = 1.0 / (big_n + rho);
        let a = rho * c;
        let d = 1.0 - a;
        let e = 2.0 * a - 1.0;
        let mut alpha = Matrix::zeros(iterations, iterations);
        let mut beta = Vec::with_capacity(iterations);
        let mut gamma = Vec::with_capacity(iterations);
        let mut geometric = 0.0;
        for k in 1..=iterations {
            alpha[(k - 1, k - 1)] = 2.0 * (a - 1.0);
            for m in 1..k {
                alpha[(k - 1, m - 1)] = e * d.powi((k - m) as i32);
            }
            gamma.push(e * d.powi(k as i32 - 1));
            beta.push(2.0 * c - e * c * geometric);
            geometric = geometric * d + 1.0;
        }
        Self { alpha, beta, gamma }
    }

    pub fn iterations(&self) -> usize {
        self.beta.len()
    }

    /// `M^k` from `Y`, `U^0` and the averaged products `ZB^1..ZB^k`.
    pub fn broadcast(&self, k: usize, y: &Matrix, u0: &Matrix, zb: &[Matrix]) -> Matrix {
        let mut m = y * self.beta[k - 1] + u0 * self.gamma[k - 1];
        for (j, p) in zb.iter().enumerate().take(k) {
            m += p * self.alpha[(k - 1, j)];
        }
        m
    }
}

/// What a semi-trusted owner knows besides the transcript.
#[derive(Debug, Clone)]
pub struct OwnerKnowledge {
    /// Zero-based; also the owner's column in `Y`.
    pub owner: usize,
    /// Own `Z_{A_i}`, `T x p` with consecutive lags.
    pub z: Matrix,
    /// Own `Y_{A_i}`, `T x 1`.
    pub y: Matrix,
    pub rho: f64,
    /// `N` in `1 / (N + rho)`; defaults to `n_parties`.
    pub n_scaling: Option<f64>,
    pub n_parties: usize,
}

impl OwnerKnowledge {
    pub fn from_embedding(
        e: &LagEmbedding,
        owner: usize,
        rho: f64,
        n_scaling: Option<f64>,
    ) -> Self {
        Self {
            owner,
            z: e.owner_block(owner),
            y: e.owner_target(owner),
            rho,
            n_scaling,
            n_parties: e.n_series,
        }
    }

    fn big_n(&self) -> f64 {
        self.n_scaling.unwrap_or(self.n_parties as f64)
    }
}

/// What the central node knows besides the inbound products.
#[derive(Debug, Clone)]
pub struct CentralKnowledge {
    pub n_parties: usize,
    /// Number of consecutive lags per owner.
    pub lag_count: usize,
    /// The shared target `Y`, if the node is allowed to use it.
    pub targets: Option<Matrix>,
}

/// The private series, `(T + p) x n` rows of the panel behind the embedding.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub series: Matrix,
}

impl GroundTruth {
    pub fn from_embedding(e: &LagEmbedding) -> Result<Self> {
        Ok(Self {
            series: e.reconstruct_panel()?,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AttackConfig {
    pub starts: usize,
    pub lm: LmConfig,
    pub seed: u64,
    pub execution: Execution,
    /// Relative distance above which two converged starts count as distinct.
    pub ambiguity_tol: f64,
    /// Max absolute error for `solved` when ground truth is given.
    pub recovery_tol: f64,
    /// Iterations of transcript to use; defaults to the predicted breach iteration.
    pub iterations: Option<usize>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            starts: 20,
            lm: LmConfig {
                max_iter: 1_000,
                ..LmConfig::default()
            },
            seed: 0,
            execution: Execution::default(),
            ambiguity_tol: 1e-5,
            recovery_tol: 1e-4,
            iterations: None,
        }
    }
}

/// `sum_m w[k,m] sum_j Z(s_j) B_j^m + beta_k Y(s) + gamma_k U^0 = target_k`
/// plus optional pinned entries of `s`.
///
/// Parameter layout: `U^0` (column-major, if present), every series, then
/// every `B_j^m` (column-major, series-major then iteration).
struct Bilinear {
    t: usize,
    p: usize,
    cols: usize,
    weights: Matrix,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    with_u0: bool,
    /// Per unknown series, the `Y` column its shifted values fill.
    tie_columns: Vec<Option<usize>>,
    targets: Vec<Matrix>,
    pins: Vec<(usize, usize, f64)>,
}

impl Bilinear {
    fn k(&self) -> usize {
        self.targets.len()
    }

    fn series(&self) -> usize {
        self.tie_columns.len()
    }

    fn slen(&self) -> usize {
        self.t + self.p - 1 + usize::from(self.tie_columns.iter().any(Option::is_some))
    }

    fn u0_len(&self) -> usize {
        if self.with_u0 {
            self.t * self.cols
        } else {
            0
        }
    }

    fn s_off(&self, j: usize) -> usize {
        self.u0_len() + j * self.slen()
    }

    fn b_off(&self, j: usize, m: usize) -> usize {
        self.u0_len() + self.series() * self.slen() + (j * self.k() + m) * self.p * self.cols
    }

    fn len(&self) -> usize {
        self.b_off(self.series(), 0)
    }

    fn rows(&self) -> usize {
        self.k() * self.t * self.cols + self.pins.len()
    }

    fn target_norm(&self) -> f64 {
        self.targets
            .iter()
            .map(|m| m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    fn series_values(&self, x: &DVector<f64>, j: usize) -> Vec<f64> {
        let o = self.s_off(j);
        x.as_slice()[o..o + self.slen()].to_vec()
    }

    /// Columns of every parameter other than the series.
    fn linear_columns(&self) -> Vec<usize> {
        (0..self.u0_len())
            .chain(self.b_off(0, 0)..self.len())
            .collect()
    }
}

impl ResidualProblem for Bilinear {
    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let (t, p, cols) = (self.t, self.p, self.cols);
        let mut r = DVector::zeros(self.rows());
        for k in 0..self.k() {
            for c in 0..cols {
                for tt in 0..t {
                    let mut v = -self.targets[k][(tt, c)];
                    if self.with_u0 {
                        v += self.gamma[k] * x[c * t + tt];
                    }
                    for j in 0..self.series() {
                        let so = self.s_off(j);
                        if self.tie_columns[j] == Some(c) {
                            v += self.beta[k] * x[so + tt + p];
                        }
                        for m in 0..self.k() {
                            let w = self.weights[(k, m)];
                            if w == 0.0 {
                                continue;
                            }
                            let bo = self.b_off(j, m);
                            let acc: f64 = (0..p)
                                .map(|q| x[so + tt + p - 1 - q] * x[bo + q + c * p])
                                .sum();
                            v += w * acc;
                        }
                    }
                    r[(k * cols + c) * t + tt] = v;
                }
            }
        }
        let base = self.k() * t * cols;
        for (i, &(j, idx, val)) in self.pins.iter().enumerate() {
            r[base + i] = x[self.s_off(j) + idx] - val;
        }
        r
    }

    fn jacobian(&self, x: &DVector<f64>) -> Matrix {
        let (t, p, cols) = (self.t, self.p, self.cols);
        let mut jac = Matrix::zeros(self.rows(), self.len());
        for k in 0..self.k() {
            for c in 0..cols {
                for tt in 0..t {
                    let row = (k * cols + c) * t + tt;
                    if self.with_u0 {
                        jac[(row, c * t + tt)] = self.gamma[k];
                    }
                    for j in 0..self.series() {
                        let so = self.s_off(j);
                        if self.tie_columns[j] == Some(c) {
                            jac[(row, so + tt + p)] += self.beta[k];
                        }
                        for m in 0..self.k() {
                            let w = self.weights[(k, m)];
                            if w == 0.0 {
                                continue;
                            }
                            let bo = self.b_off(j, m);
                            for q in 0..p {
                                let si = so + tt + p - 1 - q;
                                let bi = bo + q + c * p;
                                jac[(row, si)] += w * x[bi];
                                jac[(row, bi)] += w * x[si];
                            }
                        }
                    }
                }
            }
        }
        let base = self.k() * t * cols;
        for (i, &(j, idx, _)) in self.pins.iter().enumerate() {
            jac[(base + i, self.s_off(j) + idx)] = 1.0;
        }
        jac
    }
}

struct StartResult {
    x: DVector<f64>,
    residual: f64,
    converged: bool,
}

struct Solved {
    best: StartResult,
    converged_starts: usize,
    distinct: usize,
}

/// Random series, then the linear least-squares fill of the remaining
/// parameters, then LM on everything.
fn solve_multistart(problem: &Bilinear, init_scale: f64, cfg: &AttackConfig) -> Solved {
    let tol = cfg.lm.tol_residual * problem.target_norm().max(1.0);
    let lm = LmConfig {
        tol_residual: tol,
        ..cfg.lm
    };
    let linear = problem.linear_columns();
    let starts = cfg.starts.max(1);
    let mut results = cfg.execution.map(starts, |i| {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, i as u64));
        let mut x = DVector::zeros(problem.len());
        for j in 0..problem.series() {
            let o = problem.s_off(j);
            for v in x.as_mut_slice()[o..o + problem.slen()].iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v = init_scale * g;
            }
        }
        let r0 = problem.residual(&x);
        let jac = problem.jacobian(&x);
        let sub = Matrix::from_fn(jac.nrows(), linear.len(), |r, c| jac[(r, linear[c])]);
        let rhs = Matrix::from_column_slice(r0.len(), 1, (-r0).as_slice());
        let fill = pinv_solve(&sub, &rhs);
        for (c, &col) in linear.iter().enumerate() {
            x[col] = fill[(c, 0)];
        }
        let res = levenberg_marquardt(problem, x, &lm);
        StartResult {
            x: res.x,
            residual: res.residual_norm,
            converged: res.residual_norm <= tol,
        }
    });
    results.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let series_of = |x: &DVector<f64>| -> Vec<f64> {
        (0..problem.series())
            .flat_map(|j| problem.series_values(x, j))
            .collect()
    };
    let mut reps: Vec<Vec<f64>> = Vec::new();
    let mut converged_starts = 0;
    for r in results.iter().filter(|r| r.converged) {
        converged_starts += 1;
        let s = series_of(&r.x);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let known = reps.iter().any(|rep| {
            let d: f64 = rep
                .iter()
                .zip(&s)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d <= cfg.ambiguity_tol * norm
        });
        if !known {
            reps.push(s);
        }
    }
    Solved {
        best: results.swap_remove(0),
        converged_starts,
        distinct: reps.len(),
    }
}

fn values_of(
    transcript: &ProtocolTranscript,
    iteration: usize,
    sender: Party,
    label: &str,
) -> Result<Matrix> {
    let entry = transcript
        .iteration_entries(iteration)
        .find(|e| e.sender == sender && e.label == label)
        .ok_or_else(|| {
            Error::MissingMessage(format!("{sender}:{label} at iteration {iteration}"))
        })?;
    entry.matrix().ok_or_else(|| {
        Error::MissingMessage(format!(
            "values of {sender}:{label} (shapes-only transcript)"
        ))
    })
}

fn broadcast_iterations(transcript: &ProtocolTranscript) -> usize {
    transcript
        .entries()
        .iter()
        .filter(|e| e.sender == Party::Central && e.label == BROADCAST_LABEL)
        .filter_map(|e| e.iteration)
        .max()
        .unwrap_or(0)
}

fn product_iterations(transcript: &ProtocolTranscript) -> usize {
    transcript
        .entries()
        .iter()
        .filter(|e| e.receiver == Party::Central && e.label == PRODUCT_LABEL)
        .filter_map(|e| e.iteration)
        .max()
        .unwrap_or(0)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `min_alpha max |alpha a - b|` approximated by the least-squares `alpha`.
fn scaled_error(a: &[f64], b: &[f64]) -> f64 {
    let aa: f64 = a.iter().map(|v| v * v).sum();
    let alpha = if aa > 0.0 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / aa
    } else {
        0.0
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (alpha * x - y).abs())
        .fold(0.0, f64::max)
}

fn classify(solved: &Solved, error: Option<f64>, recovery_tol: f64) -> AttackStatus {
    if solved.converged_starts == 0 {
        AttackStatus::NotConverged
    } else if solved.distinct > 1 {
        AttackStatus::Ambiguous
    } else if error.is_some_and(|e| !(e <= recovery_tol)) {
        AttackStatus::Mismatch
    } else {
        AttackStatus::Solved
    }
}

fn underdetermined_report(
    attack: &str,
    attacker: Attacker,
    noise: &str,
    prediction: BreachPrediction,
    iterations_used: usize,
    equations: u128,
    unknowns: u128,
    structured: u128,
) -> BreachReport {
    BreachReport {
        attack: attack.to_owned(),
        attacker,
        noise: noise.to_owned(),
        prediction: Some(prediction),
        iterations_used,
        equations,
        unknowns,
        structured_unknowns: structured,
        status: AttackStatus::Underdetermined,
        solved: false,
        reconstruction_error: None,
        residual: None,
        starts: 0,
        converged_starts: 0,
        distinct_solutions: 0,
        detail: format!("{equations} equations < {unknowns} unknowns"),
        recovered: Vec::new(),
    }
}

/// Semi-trusted owner reconstructing its competitors' series from the
/// broadcasts and its own products.
pub fn attack_admm_transcript(
    transcript: &ProtocolTranscript,
    knowledge: &OwnerKnowledge,
    truth: Option<&GroundTruth>,
    cfg: &AttackConfig,
) -> Result<BreachReport> {
    owner_attack(transcript, knowledge, truth, cfg, "none", String::new())
}

/// Same reconstruction on a transcript produced with noisy products. Under
/// coefficient noise the unknowns are the noisy blocks `B + W`. Under
/// intermediate noise the noise is rewritten as `Z W'` and folded into the
/// blocks as well, which is exact only when the noise lies in the column
/// space of `Z`; otherwise the zero-residual model does not hold.
pub fn attack_noisy_variants(
    transcript: &ProtocolTranscript,
    knowledge: &OwnerKnowledge,
    placement: &NoisePlacement,
    truth: Option<&GroundTruth>,
    cfg: &AttackConfig,
) -> Result<BreachReport> {
    let (label, detail) = match placement {
        NoisePlacement::None => ("none", String::new()),
        NoisePlacement::Coefficients { spec } => (
            "coefficients",
            format!(
                "unknown blocks are B + W ({} b={})",
                spec.family.name(),
                spec.scale
            ),
        ),
        NoisePlacement::Intermediate { spec } => (
            "intermediate",
            format!(
                "noise ({} b={}) rewritten as Z W' and absorbed into the blocks",
                spec.family.name(),
                spec.scale
            ),
        ),
    };
    owner_attack(transcript, knowledge, truth, cfg, label, detail)
}

/// Unknowns facing the owner under each noise placement, after folding the
/// noise into the transmitted blocks.
pub fn noisy_unknowns(t: u64, n: u64, p: u64, k: u64, placement: &NoisePlacement) -> u128 {
    let (tt, nn, pp, kk) = (t as u128, n as u128, p as u128, k as u128);
    let blocks = match placement {
        // B' = B + W
        NoisePlacement::None | NoisePlacement::Coefficients { .. } => kk * pp * nn,
        // Z B + Z W' = Z (B + W')
        NoisePlacement::Intermediate { .. } => kk * pp * nn,
    };
    tt * nn + (nn - 1) * (blocks + tt * pp + tt)
}

fn owner_attack(
    transcript: &ProtocolTranscript,
    knowledge: &OwnerKnowledge,
    truth: Option<&GroundTruth>,
    cfg: &AttackConfig,
    noise: &str,
    mut detail: String,
) -> Result<BreachReport> {
    let n = knowledge.n_parties;
    let (t, p) = knowledge.z.shape();
    if knowledge.owner >= n || knowledge.y.shape() != (t, 1) || p == 0 {
        return Err(Error::shape(
            "owner knowledge",
            format!("owner < {n}, Z Tx p, Y Tx1"),
            format!(
                "owner {}, Z {}, Y {}",
                knowledge.owner,
                shape_of(&knowledge.z),
                shape_of(&knowledge.y)
            ),
        ));
    }
    let prediction = predict_breach_owner(t as u64, n as u64, p as u64)?;
    let available = broadcast_iterations(transcript);
    let requested = cfg
        .iterations
        .or(prediction.k_breach.map(|k| k as usize))
        .unwrap_or(available);
    let k = requested.min(available);
    let equations = (t * n * k) as u128;
    let unknowns = owner_unknowns(t as u64, n as u64, p as u64, k as u64);
    let structured = (t * n + (n - 1) * (t + p + k * p * n)) as u128;
    if k == 0 || equations < unknowns {
        return Ok(underdetermined_report(
            "admm_owner",
            Attacker::SemiTrustedOwner,
            noise,
            prediction,
            k,
            equations,
            unknowns,
            structured,
        ));
    }

    let coeffs = UpdateCoefficients::new(knowledge.rho, knowledge.big_n(), k);
    let me = Party::Owner(knowledge.owner);
    let own: Vec<Matrix> = (1..=k)
        .map(|m| values_of(transcript, m, me, PRODUCT_LABEL))
        .collect::<Result<_>>()?;
    let mut targets = Vec::with_capacity(k);
    for kk in 1..=k {
        let mut target = values_of(transcript, kk, Party::Central, BROADCAST_LABEL)?;
        if target.shape() != (t, n) {
            return Err(Error::shape(
                "broadcast",
                format!("{t}x{n}"),
                shape_of(&target),
            ));
        }
        for (m, pm) in own.iter().enumerate().take(kk) {
            target -= pm * (coeffs.alpha[(kk - 1, m)] / n as f64);
        }
        let mut col = target.column_mut(knowledge.owner);
        col -= knowledge.y.column(0) * coeffs.beta[kk - 1];
        targets.push(target);
    }
    let competitors: Vec<usize> = (0..n).filter(|&c| c != knowledge.owner).collect();
    let problem = Bilinear {
        t,
        p,
        cols: n,
        weights: &coeffs.alpha / n as f64,
        beta: coeffs.beta.clone(),
        gamma: coeffs.gamma.clone(),
        with_u0: true,
        tie_columns: competitors.iter().map(|&c| Some(c)).collect(),
        targets,
        pins: Vec::new(),
    };
    let scale = (knowledge.y.norm_squared() / t as f64).sqrt().max(1e-3);
    let solved = solve_multistart(&problem, scale, cfg);

    let recovered: Vec<(usize, Vec<f64>)> = competitors
        .iter()
        .enumerate()
        .map(|(j, &c)| (c, problem.series_values(&solved.best.x, j)))
        .collect();
    let error = match truth {
        Some(gt) => {
            if gt.series.shape() != (t + p, n) {
                return Err(Error::shape(
                    "ground truth",
                    format!("{}x{n}", t + p),
                    shape_of(&gt.series),
                ));
            }
            Some(
                recovered
                    .iter()
                    .map(|(c, s)| max_abs(s, gt.series.column(*c).as_slice()))
                    .fold(0.0, f64::max),
            )
        }
        None => None,
    };
    let status = classify(&solved, error, cfg.recovery_tol);
    if noise == "intermediate" && status == AttackStatus::NotConverged {
        detail.push_str("; residual stays above tolerance because the noise is not in col(Z)");
    }
    Ok(BreachReport {
        attack: "admm_owner".into(),
        attacker: Attacker::SemiTrustedOwner,
        noise: noise.to_owned(),
        prediction: Some(prediction),
        iterations_used: k,
        equations,
        unknowns,
        structured_unknowns: structured,
        status,
        solved: status == AttackStatus::Solved,
        reconstruction_error: error,
        residual: Some(solved.best.residual),
        starts: cfg.starts.max(1),
        converged_starts: solved.converged_starts,
        distinct_solutions: solved.distinct,
        detail,
        recovered,
    })
}

/// Central node reconstructing each owner's lag block from the inbound
/// products `Z_i B_i^m`. Without `Y` the series is identified only up to
/// scale, and the reconstruction error is measured after the best rescaling.
pub fn attack_central_node(
    transcript: &ProtocolTranscript,
    knowledge: &CentralKnowledge,
    truth: Option<&GroundTruth>,
    cfg: &AttackConfig,
) -> Result<BreachReport> {
    let n = knowledge.n_parties;
    let p = knowledge.lag_count;
    let first = transcript
        .entries()
        .iter()
        .find(|e| e.receiver == Party::Central && e.label == PRODUCT_LABEL)
        .ok_or_else(|| Error::MissingMessage(format!("owner:{PRODUCT_LABEL}")))?;
    let t = first.rows;
    let prediction = predict_breach_central(t as u64, n as u64, p as u64)?;
    let available = product_iterations(transcript);
    let requested = cfg
        .iterations
        .or(prediction.k_breach.map(|k| k as usize))
        .unwrap_or(available);
    let k = requested.min(available);
    let equations = (t * n * k) as u128;
    let unknowns = central_unknowns(t as u64, n as u64, p as u64, k as u64);
    let structured = (t + p - 1 + p * n * k) as u128;
    if k == 0 || equations < unknowns {
        return Ok(underdetermined_report(
            "admm_central",
            Attacker::CentralNode,
            "none",
            prediction,
            k,
            equations,
            unknowns,
            structured,
        ));
    }
    if let Some(y) = &knowledge.targets {
        if y.shape() != (t, n) {
            return Err(Error::shape(
                "central targets",
                format!("{t}x{n}"),
                shape_of(y),
            ));
        }
    }
    if let Some(gt) = truth {
        if gt.series.nrows() < t + p - 1 || gt.series.ncols() != n {
            return Err(Error::shape(
                "ground truth",
                format!("{}x{n}", t + p),
                shape_of(&gt.series),
            ));
        }
    }

    let mut per_owner = Vec::with_capacity(n);
    for i in 0..n {
        let targets: Vec<Matrix> = (1..=k)
            .map(|m| values_of(transcript, m, Party::Owner(i), PRODUCT_LABEL))
            .collect::<Result<_>>()?;
        // Y_i[t] = s_i[t + p] for the entries inside the lag block
        let pins = knowledge
            .targets
            .as_ref()
            .map(|y| (0..t - 1).map(|r| (0, r + p, y[(r, i)])).collect())
            .unwrap_or_default();
        let problem = Bilinear {
            t,
            p,
            cols: n,
            weights: Matrix::identity(k, k),
            beta: vec![0.0; k],
            gamma: vec![0.0; k],
            with_u0: false,
            tie_columns: vec![None],
            targets,
            pins,
        };
        let scale = knowledge
            .targets
            .as_ref()
            .map(|y| (y.column(i).norm_squared() / t as f64).sqrt().max(1e-3))
            .unwrap_or(1.0);
        let cfg_i = AttackConfig {
            seed: derive_seed(cfg.seed, 1 + i as u64),
            ..*cfg
        };
        let solved = solve_multistart(&problem, scale, &cfg_i);
        let s = problem.series_values(&solved.best.x, 0);
        per_owner.push((solved, s));
    }

    let pinned = knowledge.targets.is_some();
    let error = truth.map(|gt| {
        per_owner
            .iter()
            .enumerate()
            .map(|(i, (_, s))| {
                let col = gt.series.column(i);
                let col = &col.as_slice()[..s.len()];
                if pinned {
                    max_abs(s, col)
                } else {
                    scaled_error(s, col)
                }
            })
            .fold(0.0, f64::max)
    });
    let statuses: Vec<AttackStatus> = per_owner
        .iter()
        .map(|(s, _)| classify(s, None, cfg.recovery_tol))
        .collect();
    let mut status = [AttackStatus::NotConverged, AttackStatus::Ambiguous]
        .into_iter()
        .find(|st| statuses.contains(st))
        .unwrap_or(AttackStatus::Solved);
    if status == AttackStatus::Solved && error.is_some_and(|e| !(e <= cfg.recovery_tol)) {
        status = AttackStatus::Mismatch;
    }
    let detail = if pinned {
        "Y pins the scale of each lag block".to_owned()
    } else {
        "without Y each lag block is identified up to scale; error after optimal rescaling"
            .to_owned()
    };
    Ok(BreachReport {
        attack: "admm_central".into(),
        attacker: Attacker::CentralNode,
        noise: "none".into(),
        prediction: Some(prediction),
        iterations_used: k,
        equations,
        unknowns,
        structured_unknowns: structured,
        status,
        solved: status == AttackStatus::Solved,
        reconstruction_error: error,
        residual: Some(
            per_owner
                .iter()
                .map(|(s, _)| s.best.residual)
                .fold(0.0, f64::max),
        ),
        starts: cfg.starts.max(1),
        converged_starts: per_owner
            .iter()
            .map(|(s, _)| s.converged_starts)
            .min()
            .unwrap_or(0),
        distinct_solutions: per_owner.iter().map(|(s, _)| s.distinct).max().unwrap_or(0),
        detail,
        recovered: per_owner
            .into_iter()
            .enumerate()
            .map(|(i, (_, s))| (i, s))
            .collect(),
    })
}
