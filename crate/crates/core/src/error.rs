use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("record {index}: malformed quotes ({detail})")]
    MalformedQuotes { index: usize, detail: String },

    #[error("record {index}: {detail}")]
    InvalidRecord { index: usize, detail: String },

    #[error("record {index}: out-of-order event within day {day_id}")]
    OutOfOrder { index: usize, day_id: u32 },

    #[error("record {index}: day {day_id} appears after a later day")]
    DayOrder { index: usize, day_id: u32 },

    #[error("empty event series")]
    EmptySeries,

    #[error("no events of type {0} in the series")]
    NoSuchEvents(String),

    #[error("invalid lag grid: {0}")]
    InvalidLags(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Input errors map to exit code 1, computation failures to 2.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedQuotes { .. }
                | Error::InvalidRecord { .. }
                | Error::OutOfOrder { .. }
                | Error::DayOrder { .. }
                | Error::EmptySeries
                | Error::InvalidLags(_)
                | Error::Config(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
