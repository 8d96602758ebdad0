use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot determine corpus format of {0} (expected .csv or .jsonl)")]
    UnknownFormat(PathBuf),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: u64, reason: String },

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient training data: {0}")]
    InsufficientData(String),

    #[error("model: {0}")]
    Model(String),

    #[error("researcher {0} has no record with a country")]
    NoCountriedRecords(String),

    #[error("researcher {researcher} never has {focal} as a mode country")]
    NotLinkedToFocal { researcher: String, focal: String },

    #[error("corpus window {start}..={end} is too short for trims head={head} tail={tail}")]
    WindowTooShort {
        start: i32,
        end: i32,
        head: i32,
        tail: i32,
    },

    #[error("first publication year {first} is after reference year {reference}")]
    FutureFirstPublication { first: i32, reference: i32 },

    #[error("academic age must be at least 1, got {0}")]
    InvalidAge(i32),

    #[error("field mean must be positive, got {0}")]
    NonPositiveFieldMean(f64),

    #[error("cluster assignment references unknown record {0}")]
    UnknownRecord(String),

    #[error("run identifier mismatch: truth is {truth}, outputs are {outputs}")]
    RunMismatch { truth: String, outputs: String },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
