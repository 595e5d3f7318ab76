use alloc::string::String;

/// Errors raised by the accumulation-test core.
///
/// The variants separate three failure classes so front-ends can map them
/// to distinct exit codes: bad arguments (`Domain`), inputs that fail a
/// structural check (`Validation`), and calls whose documented
/// preconditions do not hold (`Contract`).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input object failed validation (bad spec, off-grid value, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// A documented precondition of the operation does not hold.
    #[error("contract error: {0}")]
    Contract(String),
    /// Failure while parsing a textual representation.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
