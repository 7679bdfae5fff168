use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("community `{0}` has an all-zero row")]
    EmptyCommunity(String),

    #[error("random walk did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("degenerate lexicon: {0}")]
    DegenerateLexicon(String),

    #[error("seed starvation in `{community}`: missing positive {missing_positive:?}, missing negative {missing_negative:?}")]
    SeedStarvation {
        community: String,
        missing_positive: Vec<String>,
        missing_negative: Vec<String>,
    },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("zero vector for community `{0}`")]
    ZeroVector(String),

    #[error("word `{0}` not found in any lexicon")]
    WordNotFound(String),

    #[error("stage `{stage}` requires stage `{missing}` to be run first")]
    MissingPrerequisite { stage: String, missing: String },

    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("malformed cache file {path}: {reason}")]
    Cache { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
