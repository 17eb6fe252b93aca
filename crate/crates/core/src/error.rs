use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The scenario document is not valid JSON or does not match the schema.
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),

    /// The document parsed but a scenario invariant does not hold.
    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("grid dimension mismatch: expected {expected_cols}x{expected_rows}, got {cols}x{rows}")]
    DimensionMismatch {
        expected_cols: usize,
        expected_rows: usize,
        cols: usize,
        rows: usize,
    },

    #[error("non-numeric cell {value:?} at row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize, value: String },

    #[error("unknown access point id {0}")]
    UnknownAccessPoint(u32),

    #[error("map has no valid pixels")]
    EmptyMap,

    #[error("search space of {size} assignments exceeds the exhaustive limit of {limit}")]
    SearchSpaceOverflow { size: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
