use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is valid but beyond what the chosen method supports.
    #[error("unsupported scale: {0}")]
    UnsupportedScale(String),

    /// Adaptive integration could not meet its tolerance within the budget.
    #[error("numerical failure: {reason} (best estimate {estimate}, error bound {error_bound})")]
    NumericalFailure {
        reason: String,
        estimate: f64,
        error_bound: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedScale(msg.into())
    }
}
