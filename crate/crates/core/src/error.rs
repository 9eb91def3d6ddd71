use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative value {value} at row {row}, feature {feature}")]
    NegativeEntry { row: usize, feature: usize, value: f64 },

    #[error("non-finite value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },

    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    #[error("{0} has a closed-form map; no sampled spectrum")]
    NoSampledSpectrum(&'static str),

    #[error("invalid exponent p = {0}; must be finite and > 0")]
    InvalidExponent(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("k = {k} exceeds the number of samples ({n})")]
    TooManyClusters { k: usize, n: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
