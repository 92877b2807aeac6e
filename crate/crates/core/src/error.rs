use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("dates are not strictly ascending at row {row} ({date})")]
    NonAscendingDates { row: usize, date: String },
    #[error("need at least 2 tickers with complete price histories, found {found}")]
    TooFewTickers { found: usize },
    #[error("need at least 5 price rows, found {found}")]
    TooFewRows { found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact search supports at most {max} nodes, graph has {n}")]
    BudgetExceeded { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
