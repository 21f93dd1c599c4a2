//! Library side of the `spatial-beam` binary, split out so the commands can
//! be driven from tests.

pub mod commands;
pub mod config;

use thiserror::Error;

pub use commands::{cmd_expand, cmd_gen_suite, cmd_render, cmd_run, ExpandRow, RenderOptions, RunSummary};
pub use config::{resolve, AppConfig, ModelBackend, ModelSection, WorldBackend, WorldSection};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status for this fault.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Dataset(_) => 3,
            CliError::Backend(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}
