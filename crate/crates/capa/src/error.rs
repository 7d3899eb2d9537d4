//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the analysis, simulation, and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Result exceeds the representable range of `f64`.
    #[error("overflow: {0}")]
    Overflow(String),

    /// An iterative series, recursion, or contour integral failed to meet
    /// its tolerance within the configured budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// Mismatched vector/matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid run or scenario configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: config problems exit 2, everything
    /// else (including validation failures) exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
