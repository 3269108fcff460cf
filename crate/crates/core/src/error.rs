use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is missing or out of range. `key` names the
    /// offending field so front ends can report it verbatim.
    #[error("invalid value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{0}")]
    Invalid(String),

    #[error("histogram bins do not match ({left} vs {right})")]
    MismatchedBins { left: usize, right: usize },

    #[error("empty pair set")]
    EmptyPairs,

    #[error("every agent has zero out-degree")]
    NoEdges,

    #[error("kernel regression has no data on any grid point")]
    NoData,

    #[error("force field has a gap inside the covered interval at x = {0}")]
    CoverageGap(f64),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("malformed {what} in {path}: {reason}")]
    Format {
        what: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
