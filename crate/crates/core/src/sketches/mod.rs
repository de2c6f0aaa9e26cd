//! Locality-sensitive sketches: min-wise hashing for Jaccard similarity and
//! random-hyperplane sign bits for cosine similarity.
//!
//! Both families satisfy `P(hᵢ(x) = hᵢ(y)) = s(x, y)` for a single hash index,
//! so the number of agreeing positions in any index range is a binomial draw
//! with the pair's (native) similarity as success probability.

mod file;
mod minhash;
mod signature;
mod simhash;

pub use file::{read_sketches, write_sketches, SketchSet};
pub use minhash::minhash_sign;
pub use signature::{match_count, Signature};
pub use simhash::simhash_sign;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vector::{Measure, SparseVector};

/// Which hash family produced a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    MinHash,
    SimHash,
}

impl Scheme {
    pub fn for_measure(measure: Measure) -> Self {
        match measure {
            Measure::Jaccard => Scheme::MinHash,
            Measure::Cosine => Scheme::SimHash,
        }
    }

    pub fn measure(self) -> Measure {
        match self {
            Scheme::MinHash => Measure::Jaccard,
            Scheme::SimHash => Measure::Cosine,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::MinHash => "minhash",
            Scheme::SimHash => "simhash",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Scheme::MinHash => 0,
            Scheme::SimHash => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Scheme::MinHash),
            1 => Some(Scheme::SimHash),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minhash" => Ok(Scheme::MinHash),
            "simhash" => Ok(Scheme::SimHash),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A seeded family of `h` hash functions.
///
/// One global family is used per run, so every pair compares the same hash
/// functions at the same indices (required for banding).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamily {
    pub scheme: Scheme,
    pub seed: u64,
    pub h: usize,
}

impl HashFamily {
    pub fn new(scheme: Scheme, seed: u64, h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidParameter(
                "hash count must be positive".into(),
            ));
        }
        Ok(Self { scheme, seed, h })
    }

    pub fn sign(&self, v: &SparseVector) -> Result<Signature> {
        match self.scheme {
            Scheme::MinHash => minhash_sign(v, self),
            Scheme::SimHash => simhash_sign(v, self),
        }
    }

    /// Signs every vector in parallel; output order follows input order.
    pub fn sign_all(&self, vectors: &[SparseVector]) -> Result<Vec<Signature>> {
        vectors.par_iter().map(|v| self.sign(v)).collect()
    }
}

/// SplitMix64 finalizer (a bijection on u64).
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Pseudo-random 64-bit key for a dimension under a family seed.
#[inline]
pub(crate) fn dimension_key(seed: u64, dim: u32) -> u64 {
    mix64((dim as u64).wrapping_add(1).wrapping_mul(GOLDEN) ^ mix64(seed))
}

/// Derived seed for hash index `i`.
#[inline]
pub(crate) fn index_seed(seed: u64, i: usize) -> u64 {
    mix64(seed.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)))
}
