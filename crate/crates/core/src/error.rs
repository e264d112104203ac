use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lag specification: {0}")]
    InvalidLag(String),

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("model is not stationary: companion spectral radius {radius} >= 1")]
    NonStationary { radius: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("insufficient history: need {needed} rows, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("privacy calibration impossible: {0}")]
    CalibrationImpossible(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("invalid regime T={t}, n={n}, p={p}: {reason}")]
    InvalidRegime {
        t: u64,
        n: u64,
        p: u64,
        reason: &'static str,
    },

    #[error("inner dimension {0} is odd; the two-party product protocol splits the mask in equal halves")]
    OddInnerDimension(usize),

    #[error("cannot build {g} orthogonal columns: at most {max} are available")]
    OrthogonalityImpossible { g: usize, max: usize },

    #[error("commodity material inconsistent: |r_a + r_c - R_a R_c| = {0}")]
    CommodityInconsistent(f64),

    #[error("ingestion failed ({reason}) at rows {rows:?}")]
    Ingestion { reason: String, rows: Vec<usize> },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("transcript is missing message `{0}`")]
    MissingMessage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        Error::ShapeMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
