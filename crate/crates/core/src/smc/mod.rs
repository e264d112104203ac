//! Secure two- and three-entity linear-algebra protocols. Every matrix a
//! party transmits is written to the run's [`crate::ProtocolTranscript`].

mod inverse;
mod karr;
mod product;

pub use inverse::{sum_inverse, SumInverseRun};
pub use karr::{karr_multiply, nlie_counts, nlie_optimal_g, KarrRun, NlieBalance};
pub use product::{
    ac_commodity, ac_commodity_with, ac_two_party, ac_two_party_with_mask, CommodityMaterial,
    CommodityOptions, OddPolicy, ProductRun, Roles, ShareSplit, TwoPartyOptions, LABEL_A_MASKED,
    LABEL_A_M_RIGHT, LABEL_COMMODITY_T, LABEL_C_MASKED, LABEL_MINV_TOP_C,
};
