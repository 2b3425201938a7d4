use std::path::PathBuf;

use hypermon_core::formula::{FragmentError, ParseError};
use hypermon_core::generators::GenError;
use hypermon_core::monitor::MonitorError;
use hypermon_core::oracle::OracleError;
use hypermon_core::trace::UpdateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {what}: {error}")]
    Parse { what: String, error: ParseError },
    #[error("{0}")]
    Fragment(FragmentError),
    #[error("{0}")]
    Generator(GenError),
    #[error("{0}")]
    Monitor(MonitorError),
    #[error("oracle: {0}")]
    Oracle(OracleError),
    #[error("{path}: {error}")]
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: {error}")]
    Update {
        path: PathBuf,
        line: usize,
        error: UpdateError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// The process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 3,
            Error::Fragment(_) | Error::Generator(_) | Error::Oracle(_) => 4,
            Error::Monitor(MonitorError::Generator(_) | MonitorError::Fragment(_)) => 4,
            Error::Monitor(MonitorError::Compile { .. }) => 4,
            Error::Io { .. } | Error::Format { .. } | Error::Update { .. } => 5,
            Error::Usage(_) => 64,
            Error::Internal(_) => 70,
        }
    }
}

impl From<MonitorError> for Error {
    fn from(e: MonitorError) -> Self {
        Error::Monitor(e)
    }
}

impl From<GenError> for Error {
    fn from(e: GenError) -> Self {
        Error::Generator(e)
    }
}

impl From<OracleError> for Error {
    fn from(e: OracleError) -> Self {
        Error::Oracle(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
