//! Configuration, orchestration and result files for uwauth experiments.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{analytic, emit_scenarios, simulate, validate, RunOptions};
pub use config::{parse_config, ExperimentConfig, OutputFormat};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or arguments.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// The computation itself failed.
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<uwauth_core::Error> for CliError {
    fn from(e: uwauth_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Exit status when a validation report has gating flags.
pub const EXIT_REPORT_FLAGS: i32 = 3;
