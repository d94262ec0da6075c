use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::Class;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("row {row} has a different column count than the header")]
    RaggedRows { row: usize },
    #[error("cannot parse cell at row {row}, column {col} as a finite real")]
    UnparseableCell { row: usize, col: usize },
    #[error("label column `{0}` not present in header")]
    MissingLabelColumn(String),
    #[error("{0} class has no samples")]
    EmptyClass(Class),
    #[error("non-finite feature value in {0} sample {1}")]
    NonFiniteFeature(Class, usize),
    #[error("split would leave an empty class in one of its parts")]
    DegenerateSplit,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid FPR range ({alpha}, {beta}): requires 0 <= alpha < beta <= 1")]
    InvalidRange { alpha: f64, beta: f64 },
    #[error("invalid scorer shape: {0}")]
    BadShape(String),
    #[error("parameter vector has length {got}, layout requires {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("{class} class has {got} samples, need at least {needed} for {needed}-fold splitting")]
    TooFewSamplesPerClass { class: Class, needed: usize, got: usize },
    #[error("vector lengths disagree: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("objective or gradient became non-finite at epoch {0}")]
    NonFiniteObjective(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
