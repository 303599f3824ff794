use thiserror::Error;

use crate::vehicle::Signal;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("protocol violation: {reason} (sample indices {indices:?})")]
    ProtocolViolation { reason: String, indices: Vec<usize> },

    #[error(
        "{signal} is not constant over the segment; split at sample indices {change_indices:?}"
    )]
    SegmentSplit {
        signal: Signal,
        change_indices: Vec<usize>,
    },

    #[error("series too short: {len} samples, window needs {window}")]
    EmptySeries { len: usize, window: usize },

    #[error("underdetermined fit: {points} data points for {knots} knots, use fewer knots")]
    Underdetermined { points: usize, knots: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("surface is not monotone in the signal axis at level {level} (speed {speed_mps} m/s)")]
    NonMonotoneLevel { level: i32, speed_mps: f64 },

    #[error(
        "inversion unsupported: cross-section at {speed_mps} m/s is not monotone in the signal"
    )]
    InversionUnsupported { speed_mps: f64 },

    #[error("no valid samples to compare")]
    EmptyReport,

    #[error("unknown level {requested}; available levels: {available:?}")]
    UnknownLevel { requested: i32, available: Vec<i32> },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("time is not strictly increasing at line {line}")]
    NonMonotoneTime { line: usize },

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by malformed inputs or violated test protocols, as
    /// opposed to numerical failures during fitting or inversion.
    pub fn is_input_error(&self) -> bool {
        if let Error::Context { source, .. } = self {
            return source.is_input_error();
        }
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::ProtocolViolation { .. }
                | Error::SegmentSplit { .. }
                | Error::Schema(_)
                | Error::MissingColumn(_)
                | Error::NonMonotoneTime { .. }
                | Error::UnknownLevel { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
