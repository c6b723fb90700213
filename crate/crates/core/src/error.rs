use serde::Serialize;
use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Variants split into two families: precondition violations (bad input,
/// caught before any heavy computation) and numerical failures (a solver
/// ran but could not deliver its contract). The CLI maps the former to
/// exit code 2 and the latter to exit code 1.
#[derive(Debug, Clone, Error, Serialize, PartialEq)]
#[serde(tag = "kind", content = "detail")]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("argument outside supported envelope: {0}")]
    OutOfEnvelope(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("bracketing scan exhausted after {found} of {wanted} roots (scanned up to {limit})")]
    BracketingFailed { found: usize, wanted: usize, limit: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl Error {
    /// True when the error stems from validating inputs rather than from a
    /// numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::OutOfEnvelope(_)
                | Error::Precondition(_)
                | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
