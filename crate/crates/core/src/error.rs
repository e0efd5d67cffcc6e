//! Error type shared by the whole library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// A vector or matrix argument does not conform to the expected shape.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// A contract precondition was violated (bad range, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation produced NaN or infinity where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// Checkpoint file is corrupt or does not follow the format.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Checkpoint contents do not match the configured architecture.
    #[error("architecture mismatch: {0}")]
    ArchMismatch(String),

    /// Training aborted because a loss became non-finite.
    #[error("training diverged: {0}")]
    Diverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
