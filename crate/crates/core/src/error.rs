use std::fmt;

use thiserror::Error;

/// Why `AᵀA` fails to be irreducible, expressed on the support graph of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReducibleWitness {
    /// The support graph splits into these connected components.
    Disconnected(Vec<Vec<usize>>),
    /// The support graph is connected but two-colourable with these classes.
    Bipartite(Vec<usize>, Vec<usize>),
}

impl fmt::Display for ReducibleWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn set(v: &[usize]) -> String {
            let items: Vec<String> = v.iter().map(|i| i.to_string()).collect();
            format!("{{{}}}", items.join(","))
        }
        match self {
            ReducibleWitness::Disconnected(parts) => {
                let parts: Vec<String> = parts.iter().map(|c| set(c)).collect();
                write!(f, "disconnected components {}", parts.join(" "))
            }
            ReducibleWitness::Bipartite(a, b) => {
                write!(f, "bipartition {} {}", set(a), set(b))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix has a negative or non-finite entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("vector must have strictly positive entries (index {0})")]
    NonPositive(usize),
    #[error("zero input vector")]
    ZeroVector,
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("reducible: AᵀA is not irreducible ({0})")]
    Reducible(ReducibleWitness),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("replicate {replicate} still reducible after {attempts} draws")]
    ReplicateReducible { replicate: usize, attempts: usize },
    #[error("matrix too large for this method: n = {n}, limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
