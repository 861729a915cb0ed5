use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the toolkit.
///
/// The CLI maps variants to exit codes: `Config` -> 1, `Data`/`Io` -> 2.
/// Partial grid failures are reported through `GridReport`, not an error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Structural mismatch between tensors, parameter sets, or gradients.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid configuration or argument value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed or inconsistent dataset / snapshot file contents.
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl fmt::Display) -> Self {
        Error::Shape(msg.to_string())
    }

    pub(crate) fn config(msg: impl fmt::Display) -> Self {
        Error::Config(msg.to_string())
    }

    pub(crate) fn data(msg: impl fmt::Display) -> Self {
        Error::Data(msg.to_string())
    }
}
