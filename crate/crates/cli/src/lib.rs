//! Configuration, commands and report files for the `interconnect` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{analyze, pipeline, selftest, synthesize, SelfTestOutcome};
pub use config::{Overrides, RunConfig};

use interconnect_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric range failure: {0}")]
    Range(String),

    #[error("stage failure: {0}")]
    Stage(String),

    #[error("self-test failed: {failed} of {total} checks")]
    SelfTest { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 self-test or i/o, 2 configuration, 3 numeric range, 4 pipeline stage.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::SelfTest { .. } | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Range(_) => 3,
            CliError::Stage(_) => 4,
        }
    }

    /// Classifies a core error raised after the configuration was accepted.
    pub fn numeric(e: Error) -> Self {
        match e {
            Error::GramOverflow { .. } => CliError::Range(e.to_string()),
            other => CliError::Stage(other.to_string()),
        }
    }
}
