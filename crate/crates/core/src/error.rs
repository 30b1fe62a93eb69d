use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing artifact {0}; run the producing stage first")]
    MissingArtifact(PathBuf),

    #[error("{path}: malformed content: {message}")]
    Format { path: PathBuf, message: String },

    #[error("value {value} at index {index} lies outside the fixed range [{lo}, {hi}]")]
    OutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series of length {len} is too short for lag {lag}")]
    TooShort { len: usize, lag: usize },

    #[error("joint distribution is empty")]
    EmptyDistribution,

    #[error("external scorer: {0}")]
    Scorer(String),

    #[error("external scorer exited with {status} after {completed} of {total} responses")]
    ScorerAborted {
        status: String,
        completed: usize,
        total: usize,
    },

    #[error("plot: {0}")]
    Plot(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user input (config, files, data
    /// contracts) rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Validation(_)
            | Error::MissingArtifact(_)
            | Error::Format { .. }
            | Error::OutOfRange { .. }
            | Error::LengthMismatch { .. }
            | Error::TooShort { .. } => true,
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied
            ),
            Error::EmptyDistribution
            | Error::Scorer(_)
            | Error::ScorerAborted { .. }
            | Error::Plot(_) => false,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Io { .. } => "io",
            Error::MissingArtifact(_) => "missing_artifact",
            Error::Format { .. } => "format",
            Error::OutOfRange { .. } => "out_of_range",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::TooShort { .. } => "too_short",
            Error::EmptyDistribution => "empty_distribution",
            Error::Scorer(_) => "scorer",
            Error::ScorerAborted { .. } => "scorer_aborted",
            Error::Plot(_) => "plot",
        }
    }

    /// Path the error refers to, if any.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Error::Io { path, .. } | Error::Format { path, .. } | Error::MissingArtifact(path) => {
                Some(path)
            }
            _ => None,
        }
    }
}
