//! All-pairs similarity search over LSH sketches with sequential hypothesis
//! tests for early pruning of candidate pairs.

pub mod candidates;
pub mod concentration;
pub mod error;
pub mod eval;
pub mod normal;
pub mod pipeline;
pub mod seqtest;
pub mod sketches;
pub mod vector;

pub use error::{Error, Result};
pub use vector::{Measure, SparseVector};
