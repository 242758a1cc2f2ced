use std::io;
use std::path::PathBuf;

use confnet_core::sim::{ConfigError, SimError};

/// Failure of a command, mapped onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: line {line}: {message}")]
    Input { path: PathBuf, line: usize, message: String },
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => c.into(),
            SimError::Engine(e) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
