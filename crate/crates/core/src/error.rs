use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("duplicate atom {0}")]
    DuplicateAtom(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid position {0}")]
    InvalidPosition(String),
    #[error("term is not ground")]
    NotGround,
    #[error("translation requires closed term-in-context: {0}")]
    NotClosed(String),
    #[error("rule is not standard: {0}")]
    NotStandard(String),
    #[error("invalid rule {name}: {detail}")]
    InvalidRule { name: String, detail: String },
    #[error("unbound meta-variable {0}")]
    UnboundMetaVar(String),
    #[error("arity mismatch for {name}: expected {expected}, found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("step budget of {0} exhausted")]
    BudgetExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
