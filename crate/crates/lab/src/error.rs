use std::io;

use thiserror::Error;

/// Errors raised by the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] nv_core::Error),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}x{1} vs {2}x{3}")]
    GridMismatch(usize, usize, usize, usize),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Frequencies of a product or dilation fall outside the grid.
    #[error("support does not fit the grid: {0}")]
    SupportOverflow(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

/// `x > 0`, false for NaN.
pub(crate) fn positive(x: f64) -> bool {
    x > 0.0
}
