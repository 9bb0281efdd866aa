use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parameters too small: {0}")]
    ParamsTooSmall(String),
    #[error("imbalance too large: {0}")]
    ImbalanceTooLarge(String),
    #[error("cover invalid: {0}")]
    CoverInvalid(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::PreconditionFailed(msg.into()))
}
