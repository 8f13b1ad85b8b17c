use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] lowq_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad invocations and invalid configurations, 1 for everything
    /// that fails at run time.
    pub fn exit_code(&self) -> i32 {
        use lowq_core::Error as E;
        match self {
            AppError::Usage(_) => 2,
            AppError::Core(E::Config(_) | E::QubitBudget { .. }) => 2,
            _ => 1,
        }
    }
}
