//! Library side of the pipeline CLI: configuration, stages, artifacts and
//! report writers. The binary in `main.rs` is a thin argument parser over
//! [`commands`].

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;

use thiserror::Error;

/// Command failures, bucketed by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit code 1.
    #[error("config error: {0}")]
    Config(String),
    /// Exit code 2.
    #[error("data error: {0}")]
    Data(String),
    /// Exit code 3: the run completed but some models failed.
    #[error("{0} model run(s) failed; see the recorded errors")]
    PartialFailures(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::PartialFailures(_) => 3,
        }
    }

    pub(crate) fn data(e: swarmsel_core::Error) -> Self {
        match e {
            swarmsel_core::Error::InvalidConfig(msg) => CliError::Config(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}
