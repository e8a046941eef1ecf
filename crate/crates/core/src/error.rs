use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("weight mismatch: {0} vs {1}")]
    WeightMismatch(usize, usize),
    #[error("basis mismatch: {0} vs {1}")]
    BasisMismatch(crate::symfunc::Basis, crate::symfunc::Basis),
    #[error("capacity exceeded: degree {n} is above the enumeration limit {limit}")]
    Capacity { n: usize, limit: usize },
    #[error("classification failed: {0}")]
    Classification(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
