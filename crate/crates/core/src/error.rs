use crate::geodesy::Datum;

/// Errors produced across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("datum mismatch: expected {expected}, found {found}")]
    DatumMismatch { expected: Datum, found: Datum },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({lat}, {lon}) lies outside the terrain region")]
    OutOfRegion { lat: f64, lon: f64 },

    #[error("grid would contain {count} cells (limit {limit})")]
    TooManyCells { count: u128, limit: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported file version {0}")]
    UnsupportedVersion(u32),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        match err.classify() {
            serde_json::error::Category::Io => Error::Io(err.into()),
            _ => Error::Parse {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
        }
    }
}
