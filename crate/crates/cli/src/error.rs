use std::path::{Path, PathBuf};

use thiserror::Error;
use wavetrig_core::Error as CoreError;

pub type CliResult<T> = Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const INFEASIBLE_DOMAIN: u8 = 2;
    pub const DESIGN_FAILURE: u8 = 3;
    pub const BLOW_UP: u8 = 4;
    pub const DEGENERATE_INITIAL_DATA: u8 = 5;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
    pub const IO: u8 = 74;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("usage: {0}")]
    Usage(String),

    #[error("malformed data: {0}")]
    Data(String),

    #[error("no such run directory: {}", .0.display())]
    MissingDir(PathBuf),

    #[error("verification failed: {0}")]
    VerifyFailed(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(e) => match e {
                CoreError::InfeasibleDomain { .. } => exit::INFEASIBLE_DOMAIN,
                CoreError::DesignFailure { .. } | CoreError::NoConvergence { .. } => exit::DESIGN_FAILURE,
                CoreError::BlowUp { .. } => exit::BLOW_UP,
                CoreError::DegenerateInitialData { .. } => exit::DEGENERATE_INITIAL_DATA,
                CoreError::Config(_) | CoreError::Precondition(_) => exit::USAGE,
                CoreError::ShapeMismatch { .. } | CoreError::DegenerateRun(_) | CoreError::MissingCertificate => {
                    exit::DATA
                }
            },
            Self::Usage(_) => exit::USAGE,
            Self::Data(_) => exit::DATA,
            Self::MissingDir(_) => exit::NO_INPUT,
            Self::VerifyFailed(_) => exit::VERIFY_FAILED,
            Self::Io { .. } => exit::IO,
        }
    }
}
