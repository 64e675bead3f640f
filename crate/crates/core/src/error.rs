use std::path::PathBuf;

/// Errors raised by the estimator, bound, rate and harness layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("moment {moment} diverges for this model")]
    Divergence { moment: String },

    #[error("stream is empty: at least one sample is required")]
    EmptyStream,

    #[error("invalid input: {0}")]
    Input(String),

    #[error("screening function has zero variance")]
    DegenerateScreen,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config document: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
