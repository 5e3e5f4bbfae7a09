use thiserror::Error;

/// Errors produced while loading cases, preparing operators or solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid case: {0}")]
    Validation(String),

    #[error("branch {index} ({from} -> {to}): {reason}")]
    InvalidBranch {
        index: usize,
        from: usize,
        to: usize,
        reason: String,
    },

    #[error("network is disconnected: {0}")]
    DisconnectedNetwork(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("ill-conditioned system (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient results: {0}")]
    InsufficientResults(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
