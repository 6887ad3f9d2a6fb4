use std::fmt;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("derivative order {requested} exceeds budget {budget}")]
    OrderBudget { requested: usize, budget: usize },

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    NonConvergence { estimate: f64, error_bound: f64 },

    #[error("mollifier construction failed for q={q}: condition estimate {condition:e}")]
    Construction { q: usize, condition: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: ExpectedSet,
        found: String,
    },

    #[error("insufficient samples: {usable} usable, at least {required} required")]
    InsufficientSamples { usable: usize, required: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// The set of tokens a parser would have accepted at an error position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpectedSet(pub Vec<String>);

impl fmt::Display for ExpectedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.len() {
            0 => write!(f, "nothing"),
            1 => write!(f, "{}", self.0[0]),
            _ => write!(f, "one of {{{}}}", self.0.join(", ")),
        }
    }
}
