use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate tweet id {0:?}")]
    DuplicateId(String),

    #[error("duplicate lexicon term {term:?} at line {line}")]
    DuplicateTerm { term: String, line: usize },

    #[error("patch term {0:?} is not in the lexicon")]
    UnknownPatchTerm(String),

    #[error("scale value {0} out of range 0..=4")]
    ScaleOutOfRange(i64),

    #[error("no labels")]
    NoLabels,

    #[error("label alignment: {0}")]
    Alignment(String),

    #[error("degenerate marginals: both raters constant on the same class")]
    DegenerateMarginals,

    #[error("kappa {0} outside [-1, 1]")]
    KappaOutOfRange(f64),

    #[error("prediction for {0:?} carries no trigger terms")]
    MissingTriggers(String),

    #[error("tweets without gold labels: {}", .0.join(", "))]
    MissingGold(Vec<String>),

    #[error("tweets without resolved titles: {}", .0.join(", "))]
    MissingTitles(Vec<String>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Metadata(#[from] crate::metadata::MetaError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for failures of the environment (filesystem, network) rather than of the input data.
    pub fn is_environmental(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Metadata(e) => e.is_retryable() || matches!(e, crate::metadata::MetaError::Cache { .. }),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
