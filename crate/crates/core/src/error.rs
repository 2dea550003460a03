use thiserror::Error;

use crate::typespace::Base;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("base {0} does not support this operation")]
    UnsupportedBase(Base),

    #[error("base mismatch: expected {expected}, found {found}")]
    BaseMismatch { expected: Base, found: Base },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("constant configuration mismatch")]
    ConstantsMismatch,

    #[error("invalid constant configuration: {0}")]
    InvalidConstants(String),

    #[error("invalid type: {0}")]
    InvalidType(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("certificate is not in the age of {0}")]
    NotInAge(Base),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("cap `{cap}` exceeded: limit {limit}, needed {needed}")]
    CapExceeded {
        cap: &'static str,
        limit: usize,
        needed: usize,
    },

    #[error("budget `{0}` exhausted")]
    BudgetExhausted(&'static str),

    #[error("behavior is not realizable: {0}")]
    NotRealizable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
