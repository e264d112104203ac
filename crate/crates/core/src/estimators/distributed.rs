use serde::{Deserialize, Serialize};

use super::admm::{AdmmConfig, IterationRecord};
use super::prox::{prox_gradient_gram, ProxConfig};
use crate::linalg::{derive_seed, gaussian_matrix, l1_norm, rng_from_seed, shape_of};
use crate::privacy::NoiseSpec;
use crate::transcript::{Party, ProtocolTranscript, TranscriptMode};
use crate::var::LagEmbedding;
use crate::{Error, Execution, Matrix, Result};

/// Label of the `Z_{A_i} B_{A_i}` products sent to the central node.
pub const PRODUCT_LABEL: &str = "ZB";
/// Label of the central node's broadcast `H - ZB - U`.
pub const BROADCAST_LABEL: &str = "broadcast";

/// Local data of one owner in a feature split.
#[derive(Debug, Clone)]
pub struct PartyView {
    pub owner: usize,
    /// `Z_{A_i}`, `T x p_i`
    pub z: Matrix,
    /// `Y_{A_i}`, `T x 1`
    pub y: Matrix,
    /// `B_{A_i}`, `p_i x n`; the starting point under [`CoefficientInit::Party`]
    pub b: Matrix,
}

/// One party per series, `B_{A_i}` initialised to zero.
pub fn parties_from_embedding(e: &LagEmbedding) -> Vec<PartyView> {
    (0..e.n_series)
        .map(|i| PartyView {
            owner: i,
            z: e.owner_block(i),
            y: e.owner_target(i),
            b: Matrix::zeros(e.lags.count(), e.y.ncols()),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CoefficientInit {
    /// Use each [`PartyView::b`].
    #[default]
    Party,
    Gaussian {
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DualInit {
    #[default]
    Zero,
    Gaussian {
        scale: f64,
    },
}

/// Where owners inject noise into the products they send.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "placement")]
pub enum NoisePlacement {
    #[default]
    None,
    /// `Z_{A_i} (B_{A_i} + W)`
    Coefficients { spec: NoiseSpec },
    /// `Z_{A_i} B_{A_i} + W`
    Intermediate { spec: NoiseSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistributedConfig {
    pub admm: AdmmConfig,
    /// `N` in `1 / (N + rho)`; defaults to the number of parties.
    pub n_scaling: Option<f64>,
    pub coefficient_init: CoefficientInit,
    pub dual_init: DualInit,
    pub noise: NoisePlacement,
    pub seed: u64,
    pub transcript_mode: TranscriptMode,
    /// Keep every iteration's transmitted coefficient blocks for evaluation.
    pub record_trace: bool,
    pub execution: Execution,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for DistributedConfig {
    fn default() -> Self {
        Self {
            admm: AdmmConfig::default(),
            n_scaling: None,
            coefficient_init: CoefficientInit::Party,
            dual_init: DualInit::Zero,
            noise: NoisePlacement::None,
            seed: 0,
            transcript_mode: TranscriptMode::Full,
            record_trace: false,
            execution: Execution::default(),
            inner_tol: 1e-8,
            inner_max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistributedFit {
    /// Final `B_{A_i}` per party, in party order.
    pub blocks: Vec<Matrix>,
    pub transcript: ProtocolTranscript,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
    /// `U^0`
    pub initial_dual: Matrix,
    /// Per iteration, the coefficient blocks behind each sent product
    /// (`B + W` under coefficient noise).
    pub trace: Option<Vec<Vec<Matrix>>>,
}

impl DistributedFit {
    /// Blocks stacked in lag-major order of the embedding.
    pub fn stacked(&self, e: &LagEmbedding) -> Result<Matrix> {
        e.stack_owner_coefficients(&self.blocks)
    }
}

const STREAM_INIT: u64 = 1;
const STREAM_DUAL: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// Feature-split (sharing) ADMM for LASSO-VAR with a central node.
///
/// Iteration `k`: every owner sends `P_i = Z_{A_i} B_{A_i}^k`, the node forms
/// `ZB = (1/n) sum P_i`, `H = (Y + rho ZB + rho U) / (N + rho)`,
/// `U += ZB - H` and broadcasts `H - ZB - U`; each owner then solves its local
/// LASSO `rho/2 ||Z_{A_i} B_{A_i}^k + broadcast - Z_{A_i} B||^2 + lambda ||B||_1`.
pub fn fit_lasso_admm_distributed(
    parties: &[PartyView],
    y: &Matrix,
    cfg: &DistributedConfig,
) -> Result<DistributedFit> {
    cfg.admm.validate()?;
    let n_parties = parties.len();
    if n_parties == 0 {
        return Err(Error::param("parties", "need at least one party"));
    }
    let (t_len, k) = y.shape();
    for p in parties {
        if p.z.nrows() != t_len || p.y.nrows() != t_len || p.b.shape() != (p.z.ncols(), k) {
            return Err(Error::shape(
                "party view",
                format!("Z {t_len}xp, Y {t_len}x1, B px{k}"),
                format!(
                    "Z {}, Y {}, B {}",
                    shape_of(&p.z),
                    shape_of(&p.y),
                    shape_of(&p.b)
                ),
            ));
        }
    }
    match cfg.noise {
        NoisePlacement::Coefficients { spec } | NoisePlacement::Intermediate { spec } => {
            spec.validate()?
        }
        NoisePlacement::None => {}
    }
    let rho = cfg.admm.rho;
    let lambda = cfg.admm.lambda;
    let big_n = cfg.n_scaling.unwrap_or(n_parties as f64);
    if !(big_n > 0.0) {
        return Err(Error::param("n_scaling", "must be positive"));
    }
    let inner = ProxConfig {
        tol: cfg.inner_tol,
        max_iter: cfg.inner_max_iter,
    };
    let grams: Vec<Matrix> = parties.iter().map(|p| p.z.transpose() * &p.z).collect();

    let mut blocks: Vec<Matrix> = match cfg.coefficient_init {
        CoefficientInit::Party => parties.iter().map(|p| p.b.clone()).collect(),
        CoefficientInit::Gaussian { scale } => parties
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut rng =
                    rng_from_seed(derive_seed(derive_seed(cfg.seed, STREAM_INIT), i as u64));
                gaussian_matrix(p.z.ncols(), k, scale, &mut rng)
            })
            .collect(),
    };
    let mut u = match cfg.dual_init {
        DualInit::Zero => Matrix::zeros(t_len, k),
        DualInit::Gaussian { scale } => {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, STREAM_DUAL));
            gaussian_matrix(t_len, k, scale, &mut rng)
        }
    };
    let initial_dual = u.clone();

    let mut transcript = ProtocolTranscript::new("admm_distributed", cfg.transcript_mode);
    let mut history = Vec::new();
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut h_prev = Matrix::zeros(t_len, k);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.admm.max_iter {
        iterations = it;
        // owners: products to the central node
        let sent: Vec<(Matrix, Matrix)> = cfg.execution.map(n_parties, |i| {
            let noise_seed = derive_seed(
                derive_seed(cfg.seed, STREAM_NOISE),
                (it as u64) << 20 | i as u64,
            );
            let p = &parties[i];
            match cfg.noise {
                NoisePlacement::None => (&p.z * &blocks[i], blocks[i].clone()),
                NoisePlacement::Coefficients { spec } => {
                    let mut rng = rng_from_seed(noise_seed);
                    let noisy = &blocks[i] + spec.noise_matrix(blocks[i].nrows(), k, &mut rng);
                    (&p.z * &noisy, noisy)
                }
                NoisePlacement::Intermediate { spec } => {
                    let mut rng = rng_from_seed(noise_seed);
                    (
                        &p.z * &blocks[i] + spec.noise_matrix(t_len, k, &mut rng),
                        blocks[i].clone(),
                    )
                }
            }
        });
        let mut zb = Matrix::zeros(t_len, k);
        for (i, (prod, _)) in sent.iter().enumerate() {
            transcript.record(
                Some(it),
                Party::Owner(parties[i].owner),
                Party::Central,
                PRODUCT_LABEL,
                prod,
            );
            zb += prod;
        }
        zb /= n_parties as f64;
        if let Some(tr) = trace.as_mut() {
            tr.push(sent.into_iter().map(|(_, b)| b).collect());
        }

        // central node
        let h = (y + &zb * rho + &u * rho) / (big_n + rho);
        u += &zb - &h;
        let broadcast = &h - &zb - &u;
        transcript.record(
            Some(it),
            Party::Central,
            Party::Broadcast,
            BROADCAST_LABEL,
            &broadcast,
        );

        let primal = (&zb - &h).norm();
        let dual = rho * (&h - &h_prev).norm();
        let fitted: Matrix = parties
            .iter()
            .zip(&blocks)
            .fold(Matrix::zeros(t_len, k), |acc, (p, b)| acc + &p.z * b);
        let penalty: f64 = lambda * blocks.iter().map(l1_norm).sum::<f64>();
        let objective = 0.5 * (y - &fitted).norm_squared() + penalty;
        let augmented_lagrangian = 0.5 * (y - &h * big_n).norm_squared()
            + penalty
            + 0.5 * rho * big_n * ((&zb - &h + &u).norm_squared() - u.norm_squared());
        history.push(IterationRecord {
            iteration: it,
            primal_residual: primal,
            dual_residual: dual,
            augmented_lagrangian,
            objective,
        });
        h_prev = h;
        if primal < cfg.admm.tol_primal && dual < cfg.admm.tol_dual {
            converged = true;
            break;
        }

        // owners: local LASSO given the broadcast
        blocks = cfg.execution.map(n_parties, |i| {
            let p = &parties[i];
            let target = &p.z * &blocks[i] + &broadcast;
            let linear = p.z.transpose() * target;
            prox_gradient_gram(&grams[i], &linear, rho, lambda, &blocks[i], inner).b
        });
    }

    Ok(DistributedFit {
        blocks,
        transcript,
        history,
        converged,
        iterations,
        initial_dual,
        trace,
    })
}
