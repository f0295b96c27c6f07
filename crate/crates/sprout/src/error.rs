//! Shared error type for the whole toolkit.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across corpus loading, fitting and search.
#[derive(Debug, Error)]
pub enum Error {
    /// An input file or serialized document does not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    /// A label string is not in the declared tag set.
    #[error("label error: {0}")]
    Label(String),

    /// A parameter is outside its documented range.
    #[error("config error: {0}")]
    Config(String),

    /// Matrix or vector dimensions disagree.
    #[error("shape error: {0}")]
    Shape(String),

    /// The data violates a mathematical precondition of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The dataset is unusable (e.g. empty).
    #[error("data error: {0}")]
    Data(String),

    /// Non-finite numbers where finite values are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A serialized pipeline document has an unsupported format version.
    #[error("unsupported pipeline document version: {0}")]
    Version(String),

    /// The evolutionary search cannot make progress.
    #[error("search error: {0}")]
    Search(String),

    /// A cooperative wall-clock budget was exceeded.
    #[error("evaluation timed out")]
    Timeout,

    /// An error raised inside a pipeline stage, annotated with its position.
    #[error("stage {stage} ({kind}): {source}")]
    Stage {
        stage: usize,
        kind: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: usize, kind: &str) -> Error {
        Error::Stage {
            stage,
            kind: kind.to_string(),
            source: Box::new(self),
        }
    }

    /// Innermost error, unwrapping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
