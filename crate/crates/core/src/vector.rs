//! Sparse vectors and exact similarity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Similarity measure of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Jaccard,
    Cosine,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Jaccard => "jaccard",
            Measure::Cosine => "cosine",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jaccard" => Ok(Measure::Jaccard),
            "cosine" => Ok(Measure::Cosine),
            other => Err(Error::InvalidParameter(format!(
                "unknown measure `{other}`"
            ))),
        }
    }
}

/// A sparse vector with strictly increasing dimensions and non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    id: u64,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector, validating ordering, weights and non-emptiness.
    pub fn new(id: u64, entries: Vec<(u32, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidVector {
                id,
                reason: "no entries".into(),
            });
        }
        for pair in entries.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(Error::InvalidVector {
                    id,
                    reason: format!("dimensions not strictly increasing at {}", pair[1].0),
                });
            }
        }
        if let Some(&(d, w)) = entries.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidVector {
                id,
                reason: format!("bad weight {w} at dimension {d}"),
            });
        }
        Ok(Self { id, entries })
    }

    /// Builds a set vector (all weights 1). Dimensions are sorted and must be distinct.
    pub fn from_set(id: u64, mut dims: Vec<u32>) -> Result<Self> {
        dims.sort_unstable();
        Self::new(id, dims.into_iter().map(|d| (d, 1.0)).collect())
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn dims(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(d, _)| d)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_set(&self) -> bool {
        self.entries.iter().all(|&(_, w)| w == 1.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Size of the dimension-set intersection.
    pub fn overlap(&self, other: &SparseVector) -> usize {
        merge_join(&self.entries, &other.entries).count()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        merge_join(&self.entries, &other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Jaccard coefficient of the dimension sets.
    pub fn jaccard(&self, other: &SparseVector) -> f64 {
        let inter = self.overlap(other);
        let union = self.len() + other.len() - inter;
        inter as f64 / union as f64
    }

    /// Cosine similarity; zero when either vector has zero norm.
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        (self.dot(other) / denom).clamp(-1.0, 1.0)
    }

    pub fn similarity(&self, other: &SparseVector, measure: Measure) -> f64 {
        match measure {
            Measure::Jaccard => self.jaccard(other),
            Measure::Cosine => self.cosine(other),
        }
    }
}

/// Yields weight pairs for dimensions present in both sorted entry lists.
fn merge_join<'a>(
    a: &'a [(u32, f64)],
    b: &'a [(u32, f64)],
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    let out = (a[i].1, b[j].1);
                    i += 1;
                    j += 1;
                    return Some(out);
                }
            }
        }
        None
    })
}
