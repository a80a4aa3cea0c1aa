use thiserror::Error;

/// Errors produced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A point lies outside the region where a representation is valid.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iteration failed to converge or an expansion cannot reach the
    /// requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// A serialized file is malformed, truncated or of the wrong version.
    #[error("format error: {0}")]
    Format(String),
    /// A structural identity that holds by construction was violated.
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
