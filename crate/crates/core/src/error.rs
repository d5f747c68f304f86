use alloc::string::String;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input data violates a precondition (non-finite coordinates, bad labels, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A scalar or size argument is out of its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Tensor or layer shapes do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Model or training configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),
    /// No LIDAR beam hit a person, so no inflation radius can be derived.
    #[error("no human returns in scan")]
    NoHuman,
    /// A recorded forward trace was used after the parameters changed.
    #[error("forward trace is stale: parameters changed since it was recorded")]
    StaleTrace,
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
