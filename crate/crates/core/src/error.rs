use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("utterances are not sorted by timestamp (index {index})")]
    Ordering { index: usize },

    #[error("cannot split dataset: {0}")]
    Split(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate column: {0}")]
    DegenerateColumn(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular design matrix: collinear columns [{}]", .columns.join(", "))]
    Singular { columns: Vec<String> },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("paired differences are identically zero")]
    ZeroDifference,

    #[error("kappa is undefined: {0}")]
    UndefinedKappa(String),

    #[error("similarity is undefined: {0}")]
    UndefinedSimilarity(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {diagnostics}")]
    Divergence {
        epoch: usize,
        batch: usize,
        diagnostics: String,
    },

    #[error("model variant mismatch: {0}")]
    Variant(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
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

    pub(crate) fn parse(
        path: impl std::fmt::Display,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
