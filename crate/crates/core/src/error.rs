use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("empty message")]
    EmptyMessage,
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("enumeration budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("generator is not column reduced")]
    NotReduced,
    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("kernel basis degree bound exceeded: {0}")]
    DegreeBound(String),
    #[error("degenerate field: {0}")]
    DegenerateField(String),
    #[error("state prefix unknown: input block {0} has erasures")]
    PrefixUnknown(usize),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("pattern error: {0}")]
    Pattern(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("soundness violation in trial {trial} (seed {seed}): {detail}")]
    Soundness { trial: usize, seed: u64, detail: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
