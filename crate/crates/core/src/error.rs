use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, have {available}")]
    TooShort { needed: usize, available: usize },

    #[error("degenerate series: zero variance")]
    Degenerate,

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },

    #[error("{path}: duplicate observation for ({date}, {instrument}) on lines {first_line} and {second_line}")]
    DuplicateObservation {
        path: String,
        date: String,
        instrument: String,
        first_line: u64,
        second_line: u64,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("panel produced no observations")]
    EmptyPanel,
}
