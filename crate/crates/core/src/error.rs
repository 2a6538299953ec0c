use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("column `{0}` named in the schema is missing from the header")]
    MissingColumn(String),
    #[error("line {line}: cannot parse `{value}` in numeric column `{column}`")]
    UnparseableRow {
        line: usize,
        column: String,
        value: String,
    },
    #[error("dataset is empty after dropping incomplete rows")]
    EmptyDataset,
    #[error("schema must name exactly one {0} column")]
    SchemaRole(&'static str),
    #[error("unknown category `{value}` in column `{column}`")]
    UnknownCategory { column: String, value: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("some client shard stayed empty after {0} Dirichlet draws")]
    EmptyShardAfterRetries(usize),
    #[error("group A={group} has {available} samples, fewer than its {needed} clients")]
    InsufficientGroupSamples {
        group: u8,
        available: usize,
        needed: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("batch is empty")]
    EmptyBatch,

    #[error("length mismatch: {0} statistics but {1} weights")]
    LengthMismatch(usize, usize),
    #[error("pooled denominator is zero (b = {b}, d = {d})")]
    ZeroDenominator { b: f64, d: f64 },
    #[error("every client has an undefined heterogeneity ratio")]
    AllRatiosUndefined,
    #[error("constant C = {0} must lie strictly between 0 and 1")]
    InvalidC(f64),
    #[error("{0:?} is not a proper metric and cannot be used as a training penalty")]
    ImproperMetric(crate::fairness::MetricKind),
    #[error("local fairness of client {0} is undefined (single-group data)")]
    UndefinedLocalFairness(usize),
    #[error("statistics mix metrics or modes")]
    MixedStats,

    #[error("aggregation weights sum to {0}, expected 1")]
    WeightSumMismatch(f64),
    #[error("training diverged at round {0}: non-finite parameters")]
    DivergedTraining(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
