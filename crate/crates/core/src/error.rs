use alloc::string::String;

/// Errors raised by constructors and checkers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("non-convex input: {0}")]
    NonConvex(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
