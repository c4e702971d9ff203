//! Config-driven scenario runner around `gwphase-core`.
//!
//! A run loads a TOML config naming one scenario with its parameters and
//! resolution settings, executes the matching pipeline, and emits
//! machine-readable records (CSV or JSON) whose bytes depend only on the
//! config. Sweep points may execute concurrently (capped by the
//! `GWPHASE_THREADS` environment variable); record order never depends on
//! scheduling.

pub mod config;
pub mod records;
pub mod run;

pub use config::{OutputFormat, RunConfig};
pub use records::{emit, Field, RunRecord};
pub use run::{list_scenarios, run};

use gwphase_core::GwError;

/// Process-level error classification; maps onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid usage or configuration (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// Numerical failure inside a pipeline (exit code 3).
    #[error("numerical failure: {0}")]
    Numerical(#[from] GwError),
    /// Output could not be written (exit code 4).
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
