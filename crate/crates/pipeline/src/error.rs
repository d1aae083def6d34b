use std::path::PathBuf;

/// Failures of a batch run, grouped by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing input path {}", .0.display())]
    MissingPath(PathBuf),
    #[error("{context}: {source}")]
    Data {
        context: String,
        #[source]
        source: shadowkit::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("{failed} of {total} samples failed (threshold {threshold})")]
    FailureRate {
        failed: usize,
        total: usize,
        threshold: f64,
    },
    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::MissingPath(_) => 2,
            Self::Data { .. } | Self::Input(_) | Self::Io { .. } => 3,
            Self::FailureRate { .. } => 4,
        }
    }

    pub(crate) fn data(context: impl Into<String>, source: shadowkit::Error) -> Self {
        Self::Data {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// Attaches a context string to core errors.
pub(crate) trait DataContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> DataContext<T> for shadowkit::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| PipelineError::data(what(), e))
    }
}
