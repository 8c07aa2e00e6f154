use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A domain invariant was violated while constructing or validating a value.
    #[error("validation error: {0}")]
    Validation(String),

    /// Symmetric parameters handed to the asymmetric evaluator or vice versa.
    #[error("curvature mode mismatch: expected {expected} parameters, got {found}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// An operation was called outside of its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Scenario file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
