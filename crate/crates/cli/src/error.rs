use std::io;
use std::path::PathBuf;

use seam_core::SeamError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read config {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] SeamError),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 4 when the time grid cannot be split into segments.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ConfigFile { .. } | CliError::Output { .. } => 2,
            CliError::Core(e) => match e {
                SeamError::Divisibility { .. } => 4,
                SeamError::SolverFailure { .. }
                | SeamError::Stagnation { .. }
                | SeamError::DegenerateSnapshot { .. }
                | SeamError::DegenerateReference
                | SeamError::NumericalFault(_) => 3,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
