use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the valid domain of an operation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A request that would exceed a configured size bound.
    #[error("capacity exceeded: {what} ({requested} > {limit})")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
