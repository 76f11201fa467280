use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight specification: {0}")]
    InvalidSpec(String),

    #[error("parameter index {0} lies beyond the table and the tail rule is error-beyond")]
    ParameterIndex(usize),

    #[error("value is not exactly representable: {0}")]
    NotExact(String),

    #[error("series truncated at order {have}, order {need} required")]
    Truncation { have: usize, need: usize },

    #[error("{0}")]
    Domain(String),

    #[error("series has zero constant term")]
    ZeroConstant,

    #[error("work limit exceeded: {0}")]
    WorkLimit(String),

    #[error("coefficient memory budget exceeded: {0}")]
    Budget(String),

    #[error("partition function vanishes at n = {0}")]
    ZeroPartitionFunction(usize),

    #[error("tables too short: have order {have}, need {need}")]
    TablesTooShort { have: usize, need: usize },

    #[error("no tail table stored for l = {0}")]
    MissingTail(usize),

    #[error("invalid partition state: {0}")]
    InvalidState(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("reducible chain: {0}")]
    Reducible(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
