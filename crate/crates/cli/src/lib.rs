//! Command-line front end for the `secretary-gap` library.

pub mod args;
pub mod checks;
pub mod commands;

use thiserror::Error;

pub use args::Cli;
pub use commands::{run, RunManifest, CSV_HEADER};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or parameters outside their domain (exit 2).
    #[error("{0}")]
    Usage(String),
    /// Acceptance checks that did not pass (exit 1).
    #[error("{0}")]
    Failed(String),
    /// Anything else, such as I/O failures (exit 1).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Failed(_) | Self::Internal(_) => 1,
        }
    }
}

impl From<secretary_gap::Error> for CliError {
    fn from(e: secretary_gap::Error) -> Self {
        match e {
            secretary_gap::Error::Io(io) => Self::Internal(io.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.to_string())
    }
}
