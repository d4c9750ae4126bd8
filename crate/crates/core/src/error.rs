use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an API contract (dimension mismatch, missing field, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The covariance matrix could not be factored even after jitter.
    #[error("ill-conditioned covariance: {0}")]
    IllConditioned(String),

    /// A quadratic form that must be positive evaluated to zero.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Adaptive quadrature hit its recursion limit.
    #[error("quadrature did not converge (partial estimate {estimate:e})")]
    NonConvergence { estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
