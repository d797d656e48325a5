use std::path::Path;

use dirichlet_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("fixture hash mismatch: expected {expected}, found {found}")]
    FixtureMismatch { expected: String, found: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::InfeasibleDomain(_) | Error::OutsideDomain(_) | Error::NotAdjacent(_) => 2,
                Error::CalibrationInfeasible(_) => 3,
                Error::Numerical(_) => 4,
                _ => 1,
            },
            _ => 1,
        }
    }
}
