use std::path::PathBuf;

use qite_core::Error as CoreError;

/// Failure categories with stable process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Data(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Config(_)
            | CoreError::Parameter(_)
            | CoreError::InvalidSize { .. }
            | CoreError::TooLarge { .. } => CliError::Config(msg),
            CoreError::Numerical(_) | CoreError::DegenerateState | CoreError::Precondition(_) => {
                CliError::Numerical(msg)
            }
            CoreError::Validation(_) | CoreError::IndexOutOfRange { .. } | CoreError::UndefinedRatio => {
                CliError::Data(msg)
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
