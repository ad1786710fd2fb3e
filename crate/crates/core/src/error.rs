use thiserror::Error;

use crate::operator::Witness;

pub type Result<T, E = FrameError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("invalid exponent {0}: expected a finite value p >= 1")]
    InvalidExponent(f64),

    #[error("invalid dimension {0}: finite spaces need dim >= 1")]
    InvalidDimension(usize),

    #[error("index {index} out of range for a space of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is singular: {0}")]
    SingularOperator(String),

    #[error("operation needs finite-dimensional spaces: {0}")]
    NotFinite(String),

    #[error("frame operator is not invertible")]
    NotInvertible { witness: Option<Witness> },

    #[error("invertibility could not be decided: {0}")]
    Undecided(String),

    #[error("no finite norm bound available for {0}")]
    UnboundedCertificate(String),

    #[error("condition operator is singular: {0}")]
    ConditionOperatorSingular(String),

    #[error("norm condition violated: {0}")]
    NormConditionViolated(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("zero vector where a nonzero one is required")]
    ZeroVector,

    #[error("family of {size} elements exceeds the brute-force cap of {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("generator exhausted its budget of {budget} attempts")]
    GeneratorExhausted { budget: usize },

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("malformed input at {path}: {message}")]
    Parse { path: String, message: String },
}

impl FrameError {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        FrameError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
