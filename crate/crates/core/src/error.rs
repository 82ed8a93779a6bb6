use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("prime table too small: need primes up to {needed}, table limit is {limit}")]
    TableTooSmall { needed: u64, limit: u64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
