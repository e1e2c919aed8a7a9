use std::path::PathBuf;

use thiserror::Error;

use crate::quarter::QuarterId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("calendar gap: no observations for {missing}")]
    CalendarGap { missing: QuarterId },

    #[error("line {line}: duplicate cell ({asset}, {quarter}, {series})")]
    DuplicateCell { line: u64, asset: String, quarter: QuarterId, series: String },

    #[error("line {line}: non-positive {series} value {value} for {asset} in {quarter}")]
    NonPositiveLevel { line: u64, asset: String, quarter: QuarterId, series: String, value: f64 },

    #[error("series `{0}` is not present in the panel")]
    UnknownSeries(String),

    #[error("calendar misalignment: {0}")]
    CalendarMismatch(String),

    #[error("invalid quarter: {0}")]
    InvalidQuarter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank-deficient design: collinear column(s) {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("insufficient observations: {available} usable, {required} required")]
    InsufficientObservations { available: usize, required: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("cannot take log of non-positive {what} ({value})")]
    NonPositiveLog { what: String, value: f64 },

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

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that come from the numbers themselves rather than from the shape
    /// or content of the input files.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::RankDeficient { .. } | Error::ZeroVariance(_) | Error::NonPositiveLog { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
