use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-domain input.
    #[error("input error: {0}")]
    Input(String),
    /// An operation was called outside its documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The monoid does not support the requested computation.
    #[error("unsupported monoid: {0}")]
    Unsupported(String),
    /// A brute-force enumeration would exceed its budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    /// An internal consistency check on a computed result failed.
    #[error("internal check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(alloc::format!($($arg)*)) };
}

macro_rules! precondition {
    ($($arg:tt)*) => { $crate::error::Error::Precondition(alloc::format!($($arg)*)) };
}

pub(crate) use input_err;
pub(crate) use precondition;
