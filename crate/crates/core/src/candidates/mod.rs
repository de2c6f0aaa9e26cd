//! Candidate pair generation: LSH banding over signatures, or an inverted
//! index with prefix filtering over raw vectors.

mod banding;
mod prefix;

pub use banding::{band_index, compute_l, BandingIndex};
pub use prefix::exact_candidates;

/// An unordered pair of corpus positions, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidatePair {
    pub a: u32,
    pub b: u32,
}

impl CandidatePair {
    pub fn new(x: u32, y: u32) -> Self {
        if x < y {
            Self { a: x, b: y }
        } else {
            Self { a: y, b: x }
        }
    }
}

fn sorted_unique(mut pairs: Vec<CandidatePair>) -> Vec<CandidatePair> {
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}
