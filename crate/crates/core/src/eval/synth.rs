//! Synthetic corpora with planted pairs at controlled similarity.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::vector::{Measure, SparseVector};

use super::io::{Corpus, Format};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedLevel {
    pub similarity: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub measure: Measure,
    pub n_vectors: usize,
    pub planted: Vec<PlantedLevel>,
    /// Dimensions are drawn from `0..universe`.
    pub universe: u32,
    /// Non-zeros per background vector (and per side of a cosine pair)
    /// are drawn uniformly from this inclusive range.
    pub nnz: (usize, usize),
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(measure: Measure, n_vectors: usize, planted: Vec<PlantedLevel>, seed: u64) -> Self {
        Self {
            measure,
            n_vectors,
            planted,
            universe: 20_000,
            nnz: (40, 120),
            seed,
        }
    }
}

/// `levels` evenly spaced similarities over `[lo, hi]`, `per_level` pairs each.
pub fn spread_levels(lo: f64, hi: f64, levels: usize, per_level: usize) -> Vec<PlantedLevel> {
    (0..levels)
        .map(|i| {
            let f = if levels == 1 {
                0.0
            } else {
                i as f64 / (levels - 1) as f64
            };
            PlantedLevel {
                similarity: lo + f * (hi - lo),
                count: per_level,
            }
        })
        .collect()
}

fn jaccard_pair(rng: &mut ChaCha8Rng, spec: &SynthSpec, j: f64) -> (Vec<u32>, Vec<u32>) {
    // union size U and overlap o with o/U as close to j as the size range allows
    let (lo, hi) = (spec.nnz.0.max(2), (2 * spec.nnz.1).max(spec.nnz.0 + 1));
    let (u, o) = (lo..=hi)
        .map(|u| (u, (j * u as f64).round() as usize))
        .min_by(|a, b| {
            let ea = (a.1 as f64 / a.0 as f64 - j).abs();
            let eb = (b.1 as f64 / b.0 as f64 - j).abs();
            ea.total_cmp(&eb).then(b.0.cmp(&a.0))
        })
        .unwrap();
    let o = o.max(1);
    let toks: Vec<u32> = index::sample(rng, spec.universe as usize, u)
        .into_iter()
        .map(|d| d as u32)
        .collect();
    let rest = u - o;
    let left = rest.div_ceil(2);
    let mut x = toks[..o + left].to_vec();
    let mut y = toks[..o].to_vec();
    y.extend_from_slice(&toks[o + left..]);
    x.sort_unstable();
    y.sort_unstable();
    (x, y)
}

fn random_weights(rng: &mut ChaCha8Rng, dims: &[u32]) -> Vec<(u32, f64)> {
    dims.iter()
        .map(|&d| (d, rng.random_range(0.1..1.0)))
        .collect()
}

type Entries = Vec<(u32, f64)>;

fn cosine_pair(rng: &mut ChaCha8Rng, spec: &SynthSpec, r: f64) -> (Entries, Entries) {
    let nv = rng.random_range(spec.nnz.0..=spec.nnz.1);
    let nu = rng.random_range(spec.nnz.0..=spec.nnz.1);
    let mut toks: Vec<u32> = index::sample(rng, spec.universe as usize, nv + nu)
        .into_iter()
        .map(|d| d as u32)
        .collect();
    let (vd, ud) = toks.split_at_mut(nv);
    vd.sort_unstable();
    ud.sort_unstable();
    let v = random_weights(rng, vd);
    let u = random_weights(rng, ud);
    let norm = |w: &[(u32, f64)]| w.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    let (nv, nu) = (norm(&v), norm(&u));
    let sin = (1.0 - r * r).max(0.0).sqrt();
    // disjoint supports make u ⟂ v, so cos(v, v̂·r + û·√(1−r²)) = r
    let mut y: Vec<(u32, f64)> = v.iter().map(|&(d, w)| (d, w / nv * r)).collect();
    if sin > 0.0 {
        y.extend(u.iter().map(|&(d, w)| (d, w / nu * sin)));
    }
    y.sort_by_key(|e| e.0);
    y.retain(|e| e.1 > 0.0);
    (v, y)
}

/// Generates `spec.n_vectors` vectors: the planted pairs plus random
/// background vectors, shuffled, with ids `0..n`. Deterministic in the seed.
pub fn synth(spec: &SynthSpec) -> Result<Corpus> {
    let planted: usize = spec.planted.iter().map(|p| p.count).sum();
    if 2 * planted > spec.n_vectors {
        return Err(invalid(format!(
            "{planted} planted pairs do not fit in {} vectors",
            spec.n_vectors
        )));
    }
    if let Some(p) = spec
        .planted
        .iter()
        .find(|p| !(p.similarity > 0.0 && p.similarity <= 1.0))
    {
        return Err(invalid(format!(
            "planted similarity {} outside (0, 1]",
            p.similarity
        )));
    }
    if spec.nnz.0 == 0 || spec.nnz.0 > spec.nnz.1 || (4 * spec.nnz.1) as u32 > spec.universe {
        return Err(invalid(
            "non-zero range must be non-empty and well inside the universe",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(spec.n_vectors);
    for level in &spec.planted {
        for _ in 0..level.count {
            match spec.measure {
                Measure::Jaccard => {
                    let (x, y) = jaccard_pair(&mut rng, spec, level.similarity);
                    rows.push(x.into_iter().map(|d| (d, 1.0)).collect());
                    rows.push(y.into_iter().map(|d| (d, 1.0)).collect());
                }
                Measure::Cosine => {
                    let (x, y) = cosine_pair(&mut rng, spec, level.similarity);
                    rows.push(x);
                    rows.push(y);
                }
            }
        }
    }
    while rows.len() < spec.n_vectors {
        let n = rng.random_range(spec.nnz.0..=spec.nnz.1);
        let mut dims: Vec<u32> = index::sample(&mut rng, spec.universe as usize, n)
            .into_iter()
            .map(|d| d as u32)
            .collect();
        dims.sort_unstable();
        rows.push(match spec.measure {
            Measure::Jaccard => dims.into_iter().map(|d| (d, 1.0)).collect(),
            Measure::Cosine => random_weights(&mut rng, &dims),
        });
    }
    rows.shuffle(&mut rng);
    let vectors = rows
        .into_iter()
        .enumerate()
        .map(|(i, e)| SparseVector::new(i as u64, e))
        .collect::<Result<Vec<_>>>()?;
    let format = match spec.measure {
        Measure::Jaccard => Format::Set,
        Measure::Cosine => Format::Weighted,
    };
    Ok(Corpus { vectors, format })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_levels_are_exact_when_representable() {
        let spec = SynthSpec::new(
            Measure::Jaccard,
            2,
            vec![PlantedLevel {
                similarity: 0.5,
                count: 1,
            }],
            1,
        );
        let c = synth(&spec).unwrap();
        assert_eq!(c.vectors[0].jaccard(&c.vectors[1]), 0.5);
        let spec = SynthSpec::new(
            Measure::Jaccard,
            2,
            vec![PlantedLevel {
                similarity: 0.7,
                count: 1,
            }],
            1,
        );
        let c = synth(&spec).unwrap();
        assert!((c.vectors[0].jaccard(&c.vectors[1]) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn cosine_levels_are_exact() {
        for r in [0.3, 0.7, 0.95, 1.0] {
            let spec = SynthSpec::new(
                Measure::Cosine,
                2,
                vec![PlantedLevel {
                    similarity: r,
                    count: 1,
                }],
                9,
            );
            let c = synth(&spec).unwrap();
            assert!(
                (c.vectors[0].cosine(&c.vectors[1]) - r).abs() < 1e-12,
                "{r}"
            );
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = SynthSpec::new(Measure::Cosine, 1000, spread_levels(0.1, 0.95, 5, 10), 4);
        assert_eq!(synth(&spec).unwrap(), synth(&spec).unwrap());
        assert_eq!(synth(&spec).unwrap().vectors.len(), 1000);
        let bad = SynthSpec::new(
            Measure::Jaccard,
            10,
            vec![PlantedLevel {
                similarity: 1.2,
                count: 1,
            }],
            0,
        );
        assert!(synth(&bad).is_err());
        let crowded = SynthSpec::new(
            Measure::Jaccard,
            3,
            vec![PlantedLevel {
                similarity: 0.5,
                count: 2,
            }],
            0,
        );
        assert!(synth(&crowded).is_err());
    }

    #[test]
    fn spread() {
        let l = spread_levels(0.1, 0.9, 5, 3);
        assert_eq!(l.len(), 5);
        assert!((l[2].similarity - 0.5).abs() < 1e-12);
        assert_eq!(l[4].count, 3);
    }
}
