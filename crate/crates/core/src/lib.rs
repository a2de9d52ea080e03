//! Lexical semantic change detection.
//!
//! One embedding space is trained per time slice, the earlier space is mapped
//! onto the later one with a linear transform (orthogonal Procrustes or CCA),
//! and target words are scored by the cosine distance between their aligned
//! vectors. Binary decisions come from a mean threshold, the largest gap in
//! the sorted distances, or a rank aggregate over many repeated runs.

pub mod corpus;
pub mod error;
pub mod eval;

pub mod align;
pub mod change;
pub mod cli;
pub mod ranking;
pub mod seed;
pub mod sgns;
pub mod stats;

pub use error::{Error, Result};
