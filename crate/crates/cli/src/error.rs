use switchdiff::{ModelError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("assumption check failed: {0}")]
    Assumption(String),
    #[error("numerical blow-up: {0}")]
    Blowup(String),
    #[error("model: {0}")]
    Model(ModelError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::AssumptionFailed { .. } => CliError::Assumption(e.to_string()),
            other => CliError::Model(other),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Blowup { .. } => CliError::Blowup(e.to_string()),
            SimError::Model(m) => m.into(),
        }
    }
}

impl CliError {
    /// Process exit status: 2 for configuration and usage problems, 3 for a
    /// failed model assumption, 4 for a numerical blow-up.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assumption(_) => 3,
            CliError::Blowup(_) => 4,
            _ => 2,
        }
    }
}
