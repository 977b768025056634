use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty file: {0}")]
    EmptyFile(PathBuf),
    #[error("row {row}: expected {expected} fields, found {found}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("NaN value cannot be binned")]
    NanValue,
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("class {class} has only {count} record(s); stratified split needs at least 2")]
    TooFewInClass { class: usize, count: usize },
    #[error("value index {value} out of range for key {key} (cardinality {cardinality})")]
    ValueOutOfRange {
        key: usize,
        value: usize,
        cardinality: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("could not reach target separation floor {floor} after {attempts} attempts")]
    SeparationUnreachable { floor: f64, attempts: usize },
    #[error("dead network: no output spikes during epoch {epoch}")]
    DeadNetwork { epoch: usize },
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("layer {0} has no calibrated output scale")]
    Uncalibrated(usize),
    #[error("unknown dataset `{0}` (expected one of: adult, nursery, car, connect4)")]
    UnknownDataset(String),
    #[error("checksum mismatch for {path}: expected {expected}, got {actual}")]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("encoding mismatch: model expects {expected}, dataset provides {actual}")]
    EncodingMismatch { expected: String, actual: String },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownDataset(_) => 1,
            Error::DeadNetwork { .. }
            | Error::Diverged { .. }
            | Error::SeparationUnreachable { .. } => 3,
            _ => 2,
        }
    }
}
