use std::path::PathBuf;

/// Errors produced anywhere in the simulation chain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input sizes do not agree (bit count vs. subcarriers, plan vs. frame, ...).
    #[error("size mismatch: {0}")]
    Sizing(String),

    /// A value is outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive search would exceed the configured candidate budget.
    #[error("search budget exceeded: {candidates} candidates (W^(M-1) with W={w}, M={m}) > budget {budget}")]
    Budget {
        candidates: u128,
        w: usize,
        m: usize,
        budget: u64,
    },

    /// An integer result does not fit the return width.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Malformed configuration text or CLI override.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    ///
    /// `0` success, `1` validation, `2` budget/overflow, `3` I/O.
    /// Exit code `4` (data mismatch) is not an error and is emitted by the
    /// round-trip runner directly.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Sizing(_) | Error::InvalidInput(_) | Error::Config(_) => 1,
            Error::Budget { .. } | Error::Overflow(_) => 2,
            Error::Io { .. } | Error::Json(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
