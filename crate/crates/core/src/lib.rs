//! Collaborative vector autoregression under privacy constraints.
//!
//! The crate covers four layers:
//!
//! * [`var`]: VAR model representation, lag embeddings, simulation, stationary
//!   coefficient generation, forecasting and the univariate AR baseline.
//! * [`estimators`]: least squares, ridge, centralized and feature-split
//!   distributed LASSO-ADMM, record-split consensus ADMM and noisy gradient descent.
//! * [`privacy`] and [`smc`]: additive noise with differential-privacy
//!   calibration, multiplicative masking, and the secure two-party matrix
//!   protocols, all of which log every transmitted matrix to a
//!   [`ProtocolTranscript`].
//! * [`adversary`]: equation counting for the breach bounds and empirical
//!   reconstruction attacks that consume nothing but transcripts.
//!
//! [`experiments`] drives the Monte Carlo studies. Replications, multi-start
//! attacks and per-party solves run on rayon when the `parallel` feature is
//! enabled and fall back to plain iteration otherwise.

pub mod adversary;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod parallel;
pub mod privacy;
pub mod smc;
pub mod transcript;
pub mod var;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use parallel::Execution;
pub use transcript::{Party, ProtocolTranscript, TranscriptEntry, TranscriptMode};
