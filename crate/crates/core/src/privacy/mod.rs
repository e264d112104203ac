//! Data-transformation privacy mechanisms.

mod masking;
mod noise;

pub use masking::{
    postmultiply_mask, premultiply_mask, ridge_outsource, ridge_outsource_seeded, ridge_system,
    MaskKind, MaskedRecords, MaskingKey, PostMaskDiagnostic, RecordParty, RidgeOutsourceResult,
    DEFAULT_MASK_CONDITION,
};
pub use noise::{
    add_noise, empirical_sensitivity, gaussian_sigma, laplace_epsilon, NoiseFamily, NoiseSpec,
};
