use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameter or flag value.
    #[error("{0}")]
    Parameter(String),
    /// Malformed input file or config.
    #[error("{0}")]
    Parse(String),
    /// Request exceeds a documented size cap.
    #[error("{0}")]
    Capacity(String),
    /// Internal invariant violation; indicates a bug.
    #[error("{0}")]
    Internal(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 usage/parse, 3 capacity, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Parse(_) | Error::Io { .. } => 2,
            Error::Capacity(_) => 3,
            Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
