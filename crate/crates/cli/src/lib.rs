//! Experiment runner behind the `swarmbandit` binary.

use std::path::{Path, PathBuf};

pub mod args;
pub mod runner;

pub use args::{parse_args, ExperimentSpec};
pub use runner::run_experiment;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(clap::Error),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("config file {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] swarmbandit::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 0 for help/version, 2 for usage errors, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Invalid(_) | CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Sim(_) => 1,
        }
    }
}
