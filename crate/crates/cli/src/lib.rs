//! Driver for `ccforms-core`: reads a JSON run configuration and writes
//! geodesic polylines, surface meshes, per-vertex CSV tables and JSON
//! reports.

pub mod commands;
pub mod config;
pub mod export;
pub mod verify;

use std::path::PathBuf;

pub use commands::{run, Command};
pub use config::{load_config, parse_config, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    /// Parameters that do not give an immersed surface.
    #[error("refused: {0}")]
    Refused(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Refused(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<ccforms_core::Error> for CliError {
    fn from(e: ccforms_core::Error) -> Self {
        match e {
            ccforms_core::Error::Domain(_) => CliError::Numeric(e.to_string()),
            e if e.is_numeric() => CliError::Numeric(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e.to_string()))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e.to_string()))
    }
}

/// Result of one command: whether its checks passed, the text summary and
/// the files written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}
