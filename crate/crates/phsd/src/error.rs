use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit-code contract:
/// `Param` is a usage error, `Format`/`Dims`/`Io` are data errors, and
/// `Numerics` is a numerical failure.
#[derive(Debug, Error)]
pub enum PhsdError {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("dimension mismatch: {0}")]
    Dims(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("numerical failure: {0}")]
    Numerics(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PhsdError>;

impl PhsdError {
    pub fn param(msg: impl Into<String>) -> Self {
        PhsdError::Param(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        PhsdError::Dims(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        PhsdError::Format(msg.into())
    }

    pub fn numerics(msg: impl Into<String>) -> Self {
        PhsdError::Numerics(msg.into())
    }
}
