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

    #[error("csv: {0}")]
    Csv(String),

    #[error("row {row}, column \"{column}\": cannot parse {value:?} as a real number")]
    Parse {
        row: u64,
        column: String,
        value: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("too few rows: need at least {needed}, have {actual}")]
    TooFewRows { needed: usize, actual: usize },

    #[error("rank-deficient design: columns {} are linearly dependent", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("GCV undefined: effective parameters {effective:.3} >= rows {rows}")]
    GcvUndefined { effective: f64, rows: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("render: {0}")]
    Render(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
