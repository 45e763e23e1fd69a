use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("direction must have unit norm, got norm {0}")]
    InvalidDirection(f64),

    #[error("matrix is not orthogonal (|M^T M - I|_F = {0:e})")]
    NotOrthogonal(f64),

    #[error("quantile level {0} outside (0, 1]")]
    QuantileOutOfRange(f64),

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("image error: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
