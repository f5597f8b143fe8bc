use std::path::PathBuf;

/// Failures of a run, mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical abort at t = {time}: {reason}")]
    Numerical { time: f64, reason: String },
    #[error(transparent)]
    Core(#[from] ccsl_core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn numerical(time: f64, reason: impl Into<String>) -> Self {
        Self::Numerical { time, reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for numerical aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Core(ccsl_core::Error::Usage(_)) | Self::Core(ccsl_core::Error::InvalidGrid(_)) => 2,
            Self::Core(ccsl_core::Error::Stencil { .. }) => 2,
            Self::Numerical { .. } | Self::Core(_) => 3,
            Self::Io { .. } => 1,
        }
    }
}
