//! Exact symmetric-function engine for the cyclic-molecule bases `C_α` and
//! `K_α`, their Kronecker products, and the Steggall-pattern count of
//! `C_n ⋆ C_n`.

pub mod cli;
pub mod cycleindex;
pub mod error;
pub mod kronecker;
pub mod partitions;
pub mod permutations;
pub mod steggall;
pub mod symfunc;

pub use error::{Error, Result};
pub use partitions::Partition;
pub use permutations::{ElementGroup, Permutation};
pub use symfunc::{Basis, SymFunc};
