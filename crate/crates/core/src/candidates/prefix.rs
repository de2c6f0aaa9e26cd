use std::collections::HashMap;

use rayon::prelude::*;

use crate::vector::{Measure, SparseVector};

use super::{sorted_unique, CandidatePair};

/// All pairs that may reach similarity `t`, found through an inverted index
/// with prefix filtering. Pairs sharing no dimension are never emitted.
///
/// Jaccard indexes the first `|x| − ⌈t·|x|⌉ + 1` tokens of each set in
/// ascending document-frequency order and applies the size bound
/// `t·|x| ≤ |y| ≤ |x|/t`. Cosine indexes everything and probes with the
/// shortest prefix of `x` whose remainder satisfies
/// `Σ x̂_d · max_y ŷ_d < t`.
pub fn exact_candidates(vectors: &[SparseVector], t: f64, measure: Measure) -> Vec<CandidatePair> {
    if vectors.len() < 2 {
        return Vec::new();
    }
    match measure {
        Measure::Jaccard => jaccard_candidates(vectors, t),
        Measure::Cosine => cosine_candidates(vectors, t),
    }
}

const SLACK: f64 = 1e-9;

fn jaccard_candidates(vectors: &[SparseVector], t: f64) -> Vec<CandidatePair> {
    let mut df: HashMap<u32, u32> = HashMap::new();
    for v in vectors {
        for d in v.dims() {
            *df.entry(d).or_default() += 1;
        }
    }
    let prefixes: Vec<Vec<u32>> = vectors
        .par_iter()
        .map(|v| {
            let mut toks: Vec<u32> = v.dims().collect();
            toks.sort_unstable_by_key(|d| (df[d], *d));
            let len = toks.len();
            let keep = (len + 1)
                .saturating_sub((t * len as f64 - SLACK).ceil().max(0.0) as usize)
                .clamp(1, len);
            toks.truncate(keep);
            toks
        })
        .collect();

    let mut index: HashMap<u32, Vec<u32>> = HashMap::new();
    for (pos, p) in prefixes.iter().enumerate() {
        for &d in p {
            index.entry(d).or_default().push(pos as u32);
        }
    }

    let raw = (0..vectors.len())
        .into_par_iter()
        .flat_map_iter(|x| {
            let size = vectors[x].len() as f64;
            let mut seen = Vec::new();
            for d in &prefixes[x] {
                for &y in &index[d] {
                    let ys = vectors[y as usize].len() as f64;
                    if (y as usize) > x && ys >= t * size - SLACK && t * ys <= size + SLACK {
                        seen.push(y);
                    }
                }
            }
            seen.sort_unstable();
            seen.dedup();
            seen.into_iter()
                .map(move |y| CandidatePair::new(x as u32, y))
        })
        .collect();
    sorted_unique(raw)
}

fn cosine_candidates(vectors: &[SparseVector], t: f64) -> Vec<CandidatePair> {
    let normalized: Vec<Vec<(u32, f64)>> = vectors
        .iter()
        .map(|v| {
            let norm = v.norm();
            v.entries()
                .iter()
                .filter(|e| e.1 > 0.0)
                .map(|&(d, w)| (d, w / norm))
                .collect()
        })
        .collect();

    let mut max_weight: HashMap<u32, f64> = HashMap::new();
    let mut index: HashMap<u32, Vec<u32>> = HashMap::new();
    for (pos, v) in normalized.iter().enumerate() {
        for &(d, w) in v {
            let m = max_weight.entry(d).or_insert(0.0);
            *m = m.max(w);
            index.entry(d).or_default().push(pos as u32);
        }
    }

    let raw = (0..vectors.len())
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut bound: Vec<(f64, u32)> = normalized[x]
                .iter()
                .map(|&(d, w)| (w * max_weight[&d], d))
                .collect();
            bound.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
            // drop entries from the tail while the remainder stays below t
            let mut suffix = 0.0;
            let mut keep = bound.len();
            while keep > 0 && suffix + bound[keep - 1].0 < t - SLACK {
                suffix += bound[keep - 1].0;
                keep -= 1;
            }
            let mut seen = Vec::new();
            for &(_, d) in &bound[..keep] {
                seen.extend(index[&d].iter().copied().filter(|&y| y as usize != x));
            }
            seen.sort_unstable();
            seen.dedup();
            seen.into_iter()
                .map(move |y| CandidatePair::new(x as u32, y))
        })
        .collect();
    sorted_unique(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(vectors: &[SparseVector], t: f64, measure: Measure) -> Vec<CandidatePair> {
        let mut out = Vec::new();
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                if vectors[i].similarity(&vectors[j], measure) >= t {
                    out.push(CandidatePair::new(i as u32, j as u32));
                }
            }
        }
        out
    }

    #[test]
    fn identical_in_disjoint_out() {
        let v = vec![
            SparseVector::from_set(1, vec![1, 2, 3]).unwrap(),
            SparseVector::from_set(2, vec![1, 2, 3]).unwrap(),
            SparseVector::from_set(3, vec![7, 8]).unwrap(),
        ];
        for m in [Measure::Jaccard, Measure::Cosine] {
            assert_eq!(
                exact_candidates(&v, 0.5, m),
                vec![CandidatePair { a: 0, b: 1 }]
            );
            assert_eq!(
                exact_candidates(&v, 0.001, m),
                vec![CandidatePair { a: 0, b: 1 }]
            );
        }
    }

    proptest! {
        #[test]
        fn jaccard_superset_of_brute_force(
            sets in prop::collection::vec(prop::collection::btree_set(0u32..30, 1..12), 2..40),
            t in 0.05f64..1.0,
        ) {
            let v: Vec<_> = sets.into_iter().enumerate()
                .map(|(i, s)| SparseVector::from_set(i as u64, s.into_iter().collect()).unwrap())
                .collect();
            let cands = exact_candidates(&v, t, Measure::Jaccard);
            for p in brute(&v, t, Measure::Jaccard) {
                prop_assert!(cands.binary_search(&p).is_ok(), "missed {:?}", p);
            }
            prop_assert!(cands.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn cosine_superset_of_brute_force(
            rows in prop::collection::vec(prop::collection::btree_map(0u32..25, 0.01f64..5.0, 1..10), 2..40),
            t in 0.05f64..1.0,
        ) {
            let v: Vec<_> = rows.into_iter().enumerate()
                .map(|(i, r)| SparseVector::new(i as u64, r.into_iter().collect()).unwrap())
                .collect();
            let cands = exact_candidates(&v, t, Measure::Cosine);
            for p in brute(&v, t, Measure::Cosine) {
                prop_assert!(cands.binary_search(&p).is_ok(), "missed {:?}", p);
            }
            prop_assert!(cands.iter().all(|p| p.a < p.b));
        }
    }
}
