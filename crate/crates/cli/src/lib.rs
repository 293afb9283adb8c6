//! Harness library behind the `toric-neat` binary: run configs, manifests,
//! and the command implementations. Split out so integration tests can
//! call commands directly.

pub mod commands;
pub mod config;
pub mod manifest;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config file or command-line value. Exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Input violates a library contract (genome schema, arity, defect
    /// limit). Exit code 3.
    #[error("{0}")]
    Contract(#[from] toric_neat::Error),
    /// Artifact or pool trouble outside the caller's control. Exit code 1.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Contract(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
