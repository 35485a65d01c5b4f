use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("insufficient data for {ticker}: {rows} valid rows, need at least {needed}")]
    InsufficientData {
        ticker: String,
        rows: usize,
        needed: usize,
    },

    #[error("invalid price series {ticker}: {reason}")]
    InvalidSeries { ticker: String, reason: String },

    #[error("no common dates across {0} series")]
    NoCommonDates(usize),

    #[error("empty window {start}..={end} for {ticker}")]
    EmptyWindow {
        ticker: String,
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined Sharpe index: annual risk is {0}")]
    UndefinedSharpe(f64),

    #[error("undefined correlation: constant input")]
    UndefinedCorrelation,

    #[error("zero forecast value at index {0}")]
    ZeroForecast(usize),

    #[error("{count} assets cannot form {group_count} groups of {group_size}")]
    Indivisible {
        count: usize,
        group_count: usize,
        group_size: usize,
    },

    #[error("no usable paths in ensemble")]
    NoUsablePaths,
}

impl Error {
    /// True for failures of the numerical kind (undefined ratios, degenerate
    /// inputs) as opposed to problems with the data files themselves.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::UndefinedSharpe(_)
                | Error::UndefinedCorrelation
                | Error::ZeroForecast(_)
                | Error::NoUsablePaths
                | Error::InvalidWeights(_)
        )
    }
}
