use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(u64, u64),
    #[error("invalid character: {0}")]
    InvalidCharacter(String),
    #[error("character is not primitive: {0}")]
    NotPrimitive(String),
    #[error("invalid local specification: {0}")]
    InvalidSpec(String),
    #[error("invalid counting function: {0}")]
    InvalidCounting(String),
    #[error("counting function is not fair (fails at r = {witness})")]
    Unfair { witness: u64 },
    #[error("enumeration budget of {0} characters exhausted")]
    BudgetExhausted(u64),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
