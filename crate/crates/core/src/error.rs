use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("InvalidCoin: |a|^2 + |b|^2 = {norm_sqr}, expected 1")]
    InvalidCoin { norm_sqr: f64 },

    #[error("DegenerateCoin: |a| = {abs_a} is not strictly between 0 and 1")]
    DegenerateCoin { abs_a: f64 },

    #[error("velocity {v} lies outside [-{limit}, {limit}]")]
    OutOfRange { v: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
