use std::path::PathBuf;

use celm_ckks::CkksError;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("{0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("model has not been fit")]
    NotFit,
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}: checksum {actual} does not match recorded {expected}")]
    Checksum { path: PathBuf, expected: String, actual: String },
    #[error("encryption: {0}")]
    Ckks(#[from] CkksError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CoreError {
    /// True for errors caused by bad input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            CoreError::Invalid(_) | CoreError::Shape(_) | CoreError::Data { .. }
        ) || matches!(self, CoreError::Ckks(CkksError::InvalidParams(_) | CkksError::BitBudgetExceeded { .. }))
    }
}

/// Io error that keeps the path in its message.
pub(crate) fn io_at(path: &std::path::Path, e: std::io::Error) -> CoreError {
    CoreError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
