use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller passed an argument the API does not accept.
    #[error("usage error: {0}")]
    Usage(String),
    /// A search (root, threshold, orbit) came up empty.
    #[error("not found: {0}")]
    NotFound(String),
    /// Step size collapsed below the floating point resolution of `t`.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    /// Iterative solve did not converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// A runtime invariant (bounds, positivity) was violated.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
