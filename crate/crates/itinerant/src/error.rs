use std::path::PathBuf;

use itinerant_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const INFEASIBLE: u8 = 2;
    pub const NOT_ENTERED: u8 = 3;
    pub const VERIFICATION: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) | Self::Io { .. } => exit::USAGE,
            Self::Core(CoreError::InfeasibleTuning(_) | CoreError::DegenerateFamily(_)) => {
                exit::INFEASIBLE
            }
            Self::Core(CoreError::Diverged { .. }) => exit::VERIFICATION,
            Self::Core(_) => exit::USAGE,
        }
    }
}
