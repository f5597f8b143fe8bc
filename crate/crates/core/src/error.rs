use alloc::string::String;

/// Errors raised by the transport core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("stencil needs {needed} cells but only {available} are available")]
    Stencil { needed: usize, available: usize },
    /// Backtracked faces lost their ordering; the step violates the
    /// per-axis velocity-difference bound.
    #[error("face ordering lost at index {index}: {left} >= {right}")]
    Ordering { index: usize, left: f64, right: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
