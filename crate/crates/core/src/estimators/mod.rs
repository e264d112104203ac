//! Coefficient estimation: closed-form LS and ridge, proximal gradient,
//! centralized and distributed ADMM for LASSO-VAR, record-split consensus
//! ADMM, and (noisy) gradient descent.

mod admm;
mod consensus;
mod distributed;
mod gradient;
mod ls;
mod prox;

pub use admm::{fit_lasso_admm_central, AdmmConfig, AdmmFit, AdmmState, IterationRecord};
pub use consensus::fit_consensus_admm;
pub use distributed::{
    fit_lasso_admm_distributed, parties_from_embedding, CoefficientInit, DistributedConfig,
    DistributedFit, DualInit, NoisePlacement, PartyView, BROADCAST_LABEL, PRODUCT_LABEL,
};
pub use gradient::{fit_gd_noisy, GdFit};
pub use ls::{fit_ls, fit_ridge};
pub use prox::{lasso_objective, prox_gradient_gram, ProxConfig, ProxResult};
