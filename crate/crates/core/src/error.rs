use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate article id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("taxonomy config: missing category {0:?}")]
    MissingCategory(String),

    #[error("taxonomy config: {category}: examples out of range ({count}, expected 5-15)")]
    ExamplesOutOfRange { category: String, count: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("cannot build category prototypes; provider-unavailable for: {}", .0.join(" | "))]
    PrototypeSetup(Vec<String>),

    #[error("empty-input")]
    EmptyInput,

    #[error("provider-unavailable: {0:?}")]
    ProviderUnavailable(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("degenerate-design: all x values are equal")]
    DegenerateDesign,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Validation failures (bad data) as opposed to fatal I/O or configuration problems.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DuplicateId { .. }
                | Error::EmptyInput
                | Error::Invalid(_)
                | Error::DegenerateDesign
                | Error::DimensionMismatch { .. }
                | Error::ZeroVector
        )
    }
}
