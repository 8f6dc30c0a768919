use thiserror::Error;

/// Errors raised by the simulator. Variants map one-to-one onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A joint or tensor-product space would exceed the configured dimension cap.
    #[error("size error: dimension {dim} exceeds the configured maximum {max}")]
    Size { dim: usize, max: usize },

    #[error("argument error: {0}")]
    Argument(String),

    /// The requested field state has no regular P representation.
    #[error("unsupported representation: {0}")]
    Unsupported(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// A request that is well-formed but identically zero by construction.
    #[error("contract error: {0}")]
    Contract(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Process exit code used by the `qlspec` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) | Error::Contract(_) => 2,
            Error::Size { .. } => 3,
            Error::Unsupported(_) => 4,
            Error::Numerical(_) => 5,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
