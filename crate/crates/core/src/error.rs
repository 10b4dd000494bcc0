use thiserror::Error;

/// Errors produced by the core toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("duplicate column {0:?} in header")]
    DuplicateColumn(String),
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("label column has {0} distinct values, expected at most two")]
    LabelCardinality(usize),
    #[error("positive label {0:?} does not occur in the label column")]
    PositiveLabelMissing(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class {label} has {count} samples, need at least {needed}")]
    ClassTooSmall {
        label: u8,
        count: usize,
        needed: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown model family {0:?}")]
    UnknownFamily(String),
    #[error("unknown hyperparameter {name:?} for family {family}")]
    UnknownHyperparameter { family: String, name: String },
    #[error("family {family} requires non-negative features, found {value} at row {row}, column {column}")]
    NegativeFeature {
        family: String,
        row: usize,
        column: usize,
        value: f64,
    },
    #[error("feature mask selects no features")]
    EmptyMask,
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("{0} coalitions exceed the exact enumeration limit of {1} features")]
    TooManyFeatures(usize, usize),
    #[error("singular linear system in {0}")]
    SingularSystem(String),
    #[error("model fit failed for particle {particle} at iteration {iteration}: {source}")]
    ParticleFit {
        particle: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
