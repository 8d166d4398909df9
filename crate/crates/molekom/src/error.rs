use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(molekom_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => 2,
            RunError::Validation(_) => 3,
            RunError::Numerical(_) => 4,
            RunError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }
}

impl From<molekom_core::Error> for RunError {
    fn from(e: molekom_core::Error) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e)
        } else {
            RunError::Validation(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
