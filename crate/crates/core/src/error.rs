use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has trusted order 0, so no derivative coefficient is trusted")]
    NoTrustedDerivative,

    #[error("not invertible: {0}")]
    NonInvertible(String),

    #[error("logarithm needs constant term 1, found {0}")]
    LogConstantTerm(Rational),

    #[error("order {requested} exceeds trusted order {trusted}")]
    OrderExceeded { requested: usize, trusted: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("basis index {index} is outside the enumerated range (limit {limit})")]
    IndexOverflow { index: usize, limit: usize },

    #[error("algebra mismatch: `{0}` vs `{1}`")]
    AlgebraMismatch(String, String),

    #[error("model has no {0} operator")]
    MissingOperator(&'static str),

    #[error("embedding undefined on basis index {0}")]
    EmbeddingUndefined(usize),

    #[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("unsupported node in rewriting: {0}")]
    UnsupportedNode(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
