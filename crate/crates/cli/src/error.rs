use std::path::PathBuf;

use strata_chern::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ParseError: {0}")]
    Parse(String),

    #[error("ValidationError({field}): {message}")]
    Validation { field: String, message: String },

    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Core(#[from] strata_chern::Error),

    #[error("panel {panel}: {source}")]
    Panel { panel: char, source: Box<CliError> },

    #[error("ViolationFound: {0} inequality violations")]
    Violations(usize),
}

impl CliError {
    /// 0 success, 1 I/O, 2 validation, 3 numerical contract, 4 gapless or on a wall.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Gapless => 4,
            },
            CliError::Panel { source, .. } => source.exit_code(),
            CliError::Violations(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
