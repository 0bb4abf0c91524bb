//! Error type shared across the crate.
//!
//! Variants are grouped by how the command-line driver reports them:
//! configuration problems, missing or malformed data, and empty results
//! (an actor for which no cluster or keyword could be produced).

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no snippets for actor {label:?} in {path}")]
    EmptyCorpus { label: String, path: PathBuf },

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("no cached hit count for query {query:?}")]
    MissingCount { query: String },

    #[error("transport failure: {0}")]
    Transport(String),

    #[error("query budget exhausted: {0}")]
    Budget(String),

    #[error("no cluster for actor {label:?}: {reason}")]
    NoCluster { label: String, reason: String },

    #[error("cannot rank an empty cluster")]
    EmptyCluster,

    #[error("evaluation produced no defined metrics: {0}")]
    EmptyReport(String),
}

impl Error {
    /// Process exit code the command-line driver maps this error to.
    /// 1 = configuration, 2 = missing or malformed data, 3 = empty result.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EmptyCorpus { .. }
            | Error::UndefinedStatistic(_)
            | Error::MissingCount { .. }
            | Error::Transport(_)
            | Error::Budget(_)
            | Error::EmptyReport(_) => 2,
            Error::NoCluster { .. } | Error::EmptyCluster => 3,
        }
    }
}
