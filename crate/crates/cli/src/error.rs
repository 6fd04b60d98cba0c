use std::path::Path;

use lmsm_core::LabError;
use thiserror::Error;

/// Failures grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// 1 validation, 2 numerical tolerance, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        let msg = e.to_string();
        match e {
            LabError::InvalidParameter(_)
            | LabError::UniformOutOfRange(_)
            | LabError::InsufficientScales { .. }
            | LabError::EmptyIndexSet(_)
            | LabError::HurstRange { .. }
            | LabError::TableRange(_) => CliError::Validation(msg),
            LabError::TolNotMet { .. } | LabError::Factorization { .. } => CliError::Numerical(msg),
            LabError::Format(_) | LabError::Io(_) | LabError::Json(_) => CliError::Io(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
