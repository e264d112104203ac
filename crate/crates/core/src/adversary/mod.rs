//! Confidentiality-breach analysis: closed-form iteration counts, equation
//! accounting over transcripts, and empirical reconstruction attacks.

mod admm_attack;
mod lm;
mod predict;
mod protocol_attack;
mod report;

pub use admm_attack::{
    attack_admm_transcript, attack_central_node, attack_noisy_variants, noisy_unknowns,
    AttackConfig, CentralKnowledge, GroundTruth, OwnerKnowledge, UpdateCoefficients,
};
pub use lm::{levenberg_marquardt, LmConfig, LmResult, ResidualProblem};
pub use predict::{
    breach_grid, central_unknowns, owner_unknowns, predict_breach, predict_breach_central,
    predict_breach_owner, write_grid_csv, Attacker, BreachPrediction, GridRow,
};
pub use protocol_attack::{
    attack_linear_algebra_protocol, hankel_unique_values, ProtocolRecovery, ThreeRunTranscripts,
};
pub use report::{write_reports_csv, AttackStatus, BreachReport};
