use std::io;
use std::path::PathBuf;

use hidden_angle_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("missing header: expected columns E,px,py,pz")]
    MissingHeader,

    #[error("line {line}: non-finite value")]
    NonFiniteValue { line: u64 },

    #[error("{0}")]
    InvalidArgument(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        AppError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
