use extremal_core::LabError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVE: i32 = 3;
pub const EXIT_UNATTAINABLE: i32 = 4;
pub const EXIT_SCAN_EXHAUSTED: i32 = 5;
pub const EXIT_DEGENERATE: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Lab(e) => lab_exit_code(e),
            CliError::Io(_) | CliError::Csv(_) => EXIT_OTHER,
        }
    }
}

pub fn lab_exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Parse(_) => EXIT_CONFIG,
        LabError::ZeroOperator
        | LabError::NonInjective { .. }
        | LabError::DimensionMismatch { .. }
        | LabError::ZeroVector
        | LabError::NotUnit { .. }
        | LabError::SolveFailure { .. }
        | LabError::NoConvergence(_) => EXIT_SOLVE,
        LabError::Unattainable { .. } | LabError::Infeasible { .. } => EXIT_UNATTAINABLE,
        LabError::ScanExhausted { .. } => EXIT_SCAN_EXHAUSTED,
        LabError::Degenerate { .. } | LabError::NotDegenerate { .. } => EXIT_DEGENERATE,
        _ => EXIT_OTHER,
    }
}
