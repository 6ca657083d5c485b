//! Error types shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition does not hold (e.g. a duration that is not an
    /// integer multiple of another).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative numerical scheme did not converge within its budget.
    /// Carries the last two estimates so callers can judge how far apart
    /// the iteration still was.
    #[error("numerical failure: {message} (last estimate {last:e}, previous {previous:e})")]
    Numerical {
        message: String,
        last: f64,
        previous: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
