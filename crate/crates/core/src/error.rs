use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("date {0} is not the last day of its month")]
    NotMonthEnd(NaiveDate),

    #[error("column header `{0}` is not a catalog code")]
    UnknownColumn(String),

    #[error("column `{0}` has no observed values")]
    AllMissing(String),

    #[error("dataset still contains missing values in column `{0}`")]
    NotImputed(String),

    #[error("target series has no entry for {0}")]
    MissingTargetDate(NaiveDate),

    #[error("unemployment rate on {date} must be strictly positive, got {value}")]
    NonPositiveRate { date: NaiveDate, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{model} diverged: {detail}")]
    Divergence { model: &'static str, detail: String },

    #[error("cell ({model}, {scaler}): {source}")]
    Cell {
        model: &'static str,
        scaler: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the failure is numerical (training diverged) rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Divergence { .. } => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn dim(expected: usize, actual: usize) -> Self {
        Error::Dimension { expected, actual }
    }
}
