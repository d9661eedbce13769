use std::path::PathBuf;

use thiserror::Error;

/// Exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration, flags or arguments.
pub const EXIT_VALIDATION: i32 = 1;
/// A size or path budget was exceeded.
pub const EXIT_RESOURCE: i32 = 2;
/// At least one self-test check failed.
pub const EXIT_SELFTEST: i32 = 3;
/// Reading or writing a file failed.
pub const EXIT_IO: i32 = 4;

/// A configuration problem, tagged with the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Simulation(#[from] qrep_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("self-test failed: {}", .0.join(", "))]
    SelfTest(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Simulation(qrep_core::Error::Resource(_)) => EXIT_RESOURCE,
            CliError::Simulation(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::SelfTest(_) => EXIT_SELFTEST,
        }
    }
}
