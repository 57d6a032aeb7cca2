use std::io;
use std::path::PathBuf;

use cv2x_aoi_core::engine::EngineError;
use cv2x_aoi_core::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{failed} of {total} sweep runs failed")]
    PartialSweep { failed: usize, total: usize },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 1 for anything wrong with the inputs, 2 for faults while running or writing.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::ConfigFile { .. } | Error::Usage(_) => 1,
            Error::Io { .. } | Error::Engine(_) | Error::PartialSweep { .. } => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
