//! Errors of the harness and their process exit codes.

use std::path::PathBuf;

use kamrot_core::Error as CoreError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("synthesis failed at chain factor {factor}: {source}")]
    Synthesis { factor: usize, source: CoreError },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Config(_) | CliError::Json(_) => ErrorClass::Usage,
            CliError::Csv(_) | CliError::Io { .. } => ErrorClass::Io,
            CliError::Synthesis { source, .. } | CliError::Core(source) => ErrorClass::of(source),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

/// Error classes and their exit codes.
///
/// | code | class |
/// |------|-------|
/// | 0 | success, ground truth recovered |
/// | 1 | ground truth not recovered (or a check reported FAIL) |
/// | 2 | usage: bad flags, configuration or parameters |
/// | 3 | arithmetic: rational iterates, failed resonance removal, vanishing denominators |
/// | 4 | normalization: fibers not close to a constant, undersampled grids, cut locus |
/// | 5 | divergence or input outside the perturbative regime |
/// | 6 | no convergence within the step budget, or unresolved rotation vector |
/// | 7 | file input/output |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Usage,
    Arithmetic,
    Normalization,
    Divergence,
    NotConverged,
    Io,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;

impl ErrorClass {
    pub fn of(e: &CoreError) -> Self {
        match e {
            CoreError::NonFinite(_)
            | CoreError::InvalidParameter(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::FrequencyMismatch => ErrorClass::Usage,
            CoreError::RationalIterate { .. }
            | CoreError::RemovalFailed { .. }
            | CoreError::DenominatorUnderflow { .. } => ErrorClass::Arithmetic,
            CoreError::CutLocus { .. }
            | CoreError::Undersampled { .. }
            | CoreError::NotNormalizable(_) => ErrorClass::Normalization,
            CoreError::NonPerturbative { .. } | CoreError::Divergence { .. } => ErrorClass::Divergence,
            CoreError::NotConverged { .. } | CoreError::RotationUnresolved { .. } => {
                ErrorClass::NotConverged
            }
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Arithmetic => 3,
            ErrorClass::Normalization => 4,
            ErrorClass::Divergence => 5,
            ErrorClass::NotConverged => 6,
            ErrorClass::Io => 7,
        }
    }
}
