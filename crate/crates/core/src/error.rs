use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} outside the supported range 1..=16")]
    DimensionOutOfRange(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("empty integration box: {0}")]
    EmptyBox(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("insufficient grid coverage: {0}")]
    Coverage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few replications: need at least {needed}, have {have}")]
    TooFewReplications { needed: usize, have: usize },

    #[error("grids are not aligned: {0}")]
    Misaligned(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
