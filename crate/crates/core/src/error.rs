use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sampler: {0}")]
    Sampler(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// Process exit code for the CLI. Distinct per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 3,
            Error::Io { .. } => 4,
            Error::Numeric(_) => 5,
            Error::Parse { .. } | Error::InvalidRow { .. } => 6,
            Error::Stage { source, .. } => source.exit_code(),
            Error::Geometry(_) | Error::InvalidInput(_) | Error::Sampler(_) => 1,
        }
    }
}
