use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distortion parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported support: atom {0} is negative")]
    NegativeSupport(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empirical distribution has no samples")]
    EmptySample,

    #[error("confidence radius is undefined for zero pulls")]
    ZeroPulls,

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error("minimum gap undefined: every grid point is co-optimal (refine eps)")]
    GapUndefined,

    #[error("horizon {horizon} too small: policy requires at least {required} rounds")]
    HorizonTooSmall { required: u64, horizon: u64 },

    #[error("arm {0} has not been pulled")]
    UnpulledArm(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("optimal value was computed for a different instance")]
    InstanceMismatch,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("policy {policy} at T={horizon}: {source}")]
    Trial {
        policy: String,
        horizon: u64,
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
