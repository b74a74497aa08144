//! Distributions, probabilistic automata and their text format.

mod dist;
mod format;
mod pa;
mod rational;

pub use dist::{check_convex, convex_combine, Dist, Label, StateId};
pub(crate) use dist::accumulate;
pub use format::{parse_pa, serialize_pa};
pub use pa::Pa;
pub use rational::{Rational, RationalParseError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: distribution sums to {total}, not 1")]
    Sum { line: usize, total: Rational },
    #[error("invalid identifier `{0}`")]
    InvalidIdent(String),
    #[error("negative weight for state {state}")]
    NegativeWeight { state: String },
    #[error("duplicate entry for state {state}")]
    DuplicateEntry { state: String },
    #[error("weights sum to {total}, not 1")]
    NotNormalized { total: Rational },
    #[error("coefficient error: {0}")]
    Coefficient(String),
    #[error("arity mismatch: {expected} arguments, {found} coefficients")]
    Arity { expected: usize, found: usize },
    #[error("invalid automaton: {0}")]
    Invalid(String),
}
