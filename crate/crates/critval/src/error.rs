//! Crate-level error type.

use crate::stats::StatsError;

/// Errors surfaced by dataset loading, rule compilation, and analysis pipelines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file failed to parse; row is 1-based (header = row 1 for CSV),
    /// column is the field name when known.
    #[error("parse error in {path} (row {row}, column {column}): {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    /// A dataset mixed trust-proxy and converted outcome labels.
    #[error("dataset mixes trust-proxy and converted outcome labels")]
    MixedOutcomeKinds,

    #[error("duplicate record id {0:?}")]
    DuplicateId(String),

    /// T6 (trust collapse) has no ordinal; analyses must exclude it first.
    #[error("trust stage T6 has no ordinal; exclude collapse cases before analysis (record {0:?})")]
    TrustCollapse(String),

    #[error("invalid rule {id:?}: {message}")]
    Rule { id: String, message: String },

    #[error("invalid weight scheme {name:?}: {message}")]
    Scheme { name: String, message: String },

    #[error(transparent)]
    Stats(#[from] StatsError),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<String>,
        row: usize,
        column: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            row,
            column: column.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
