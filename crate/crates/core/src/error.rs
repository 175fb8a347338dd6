use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Runtime,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema {path}: {message}")]
    SchemaParse { path: PathBuf, message: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("schema declares {schema} columns but the csv header has {csv}")]
    ArityMismatch { schema: usize, csv: usize },

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    UnparseableNumber {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: value `{value}` is not in the declared semantic order")]
    UnknownOrdinalValue {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: missing value")]
    MissingCell { row: usize, column: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("attribute {attribute} has a single value; it carries no distance information")]
    DegenerateAttribute { attribute: usize },

    #[error("not a permutation of 1..={len}: {values:?}")]
    NotAPermutation { len: usize, values: Vec<u32> },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("no attribute carries a declared semantic order")]
    NoSemanticOrder,

    #[error("dataset has no numerical attributes")]
    NoNumericalAttributes,

    #[error("dataset has no ground-truth labels")]
    NoLabels,

    #[error("{what} of size {size} exceeds the brute-force limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SchemaParse { .. }
            | Error::Schema(_)
            | Error::ArityMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::NoSemanticOrder
            | Error::NoNumericalAttributes
            | Error::NoLabels => ErrorClass::Config,
            Error::Io { .. }
            | Error::Csv(_)
            | Error::UnparseableNumber { .. }
            | Error::UnknownOrdinalValue { .. }
            | Error::MissingCell { .. }
            | Error::EmptyDataset => ErrorClass::Data,
            _ => ErrorClass::Runtime,
        }
    }
}
