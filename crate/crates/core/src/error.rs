use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subsystem name collision: {0}")]
    NameCollision(String),
    #[error("unknown subsystem: {0}")]
    UnknownSubsystem(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("empty subsystem selection")]
    EmptySelection,
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("input outside the promise: {0}")]
    OutsidePromise(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("linear program: {0}")]
    LinearProgram(String),
}

pub type Result<T> = std::result::Result<T, Error>;
