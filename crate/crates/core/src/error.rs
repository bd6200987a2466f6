use thiserror::Error;

/// Errors raised by the shared domain types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// `|p| >= 1`: the slope is infinite. Signals gradient blow-up, not a bug.
    #[error("slope is infinite: |p| = {0} >= 1")]
    SlopeInfinite(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid grid function: {0}")]
    InvalidGridFunction(String),
    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),
    #[error("invalid curvature field: {0}")]
    InvalidField(String),
    #[error("domain error evaluating {what} at x = {x}, s = {s}")]
    Domain { what: String, x: f64, s: f64 },
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}
