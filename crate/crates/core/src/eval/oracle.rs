use rayon::prelude::*;

use crate::vector::{Measure, SparseVector};

/// A pair found by exhaustive comparison, `id_a < id_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePair {
    pub id_a: u64,
    pub id_b: u64,
    pub similarity: f64,
}

/// Every pair with similarity `≥ t`, by brute force over all `n(n−1)/2`
/// pairs, sorted by ids.
pub fn oracle_allpairs(vectors: &[SparseVector], t: f64, measure: Measure) -> Vec<OraclePair> {
    let mut out: Vec<OraclePair> = (0..vectors.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = &vectors[i];
            vectors[i + 1..].iter().filter_map(move |y| {
                let s = x.similarity(y, measure);
                (s >= t).then(|| {
                    let (a, b) = if x.id() < y.id() {
                        (x.id(), y.id())
                    } else {
                        (y.id(), x.id())
                    };
                    OraclePair {
                        id_a: a,
                        id_b: b,
                        similarity: s,
                    }
                })
            })
        })
        .collect();
    out.sort_unstable_by_key(|p| (p.id_a, p.id_b));
    out
}
