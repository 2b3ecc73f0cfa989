use std::path::Path;

use noncollapse_core::Error as CoreError;
use thiserror::Error;

/// Failures of the harness, each tied to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("flow failure: {0}")]
    Flow(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// A core error raised while building inputs under config key `key`.
    pub fn from_input(key: &str, err: CoreError) -> Self {
        match err {
            CoreError::SpeedParse { .. } => CliError::Parse(err.to_string()),
            other => CliError::validation(key, other.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation { .. } => 3,
            CliError::Flow(_) => 5,
            CliError::Io { .. } => 6,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        CliError::Flow(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
