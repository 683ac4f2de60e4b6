//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user input failed (bad bases, dimensions, ranges).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An integer quantity (typically a modulus product) left the supported
    /// width of 2^63.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A computation would exceed its configured work budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// The seeded self-check battery reported an error above tolerance.
    #[error("self-check failed: {0}")]
    SelfCheckFailed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn overflow(msg: impl Into<String>) -> Self {
        Error::Overflow(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::BudgetExceeded(msg.into())
    }
}
