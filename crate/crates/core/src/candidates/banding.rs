use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::sketches::{mix64, Signature};

use super::{sorted_unique, CandidatePair};

/// Number of bands `⌈ln φ / ln(1 − tᵏ)⌉` needed so a pair at similarity `t`
/// collides in at least one band with probability `≥ 1 − φ`.
pub fn compute_l(t: f64, k: usize, phi: f64) -> Result<usize> {
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid(format!("threshold {t} must lie in (0, 1)")));
    }
    if k == 0 {
        return Err(invalid("band width k must be positive"));
    }
    if !(phi > 0.0 && phi < 1.0) {
        return Err(invalid(format!("miss budget {phi} must lie in (0, 1)")));
    }
    let tk = t.powi(k as i32);
    if tk >= 1.0 {
        return Err(invalid("tᵏ = 1; banding cannot separate pairs"));
    }
    Ok((phi.ln() / (-tk).ln_1p()).ceil().max(1.0) as usize)
}

/// `l` bands of `k` consecutive hash values each, starting at `offset`.
#[derive(Debug, Clone)]
pub struct BandingIndex {
    pub k: usize,
    pub l: usize,
    pub offset: usize,
    buckets: Vec<HashMap<u64, Vec<u32>>>,
}

fn band_key(sig: &Signature, from: usize, k: usize) -> u64 {
    (from..from + k).fold(0x5851_f42d_4c95_7f2d, |acc, i| mix64(acc ^ sig.value(i)))
}

/// Buckets every signature by each of its bands. Bands are built in parallel.
pub fn band_index(
    signatures: &[Signature],
    k: usize,
    l: usize,
    offset: usize,
) -> Result<BandingIndex> {
    if k == 0 || l == 0 {
        return Err(invalid("k and l must be positive"));
    }
    let needed = offset + k * l;
    if let Some(short) = signatures.iter().find(|s| s.len() < needed) {
        return Err(Error::SignatureTooShort {
            needed,
            have: short.len(),
        });
    }
    let buckets = (0..l)
        .into_par_iter()
        .map(|band| {
            let from = offset + band * k;
            let mut map: HashMap<u64, Vec<u32>> = HashMap::new();
            for (pos, sig) in signatures.iter().enumerate() {
                map.entry(band_key(sig, from, k))
                    .or_default()
                    .push(pos as u32);
            }
            map
        })
        .collect();
    Ok(BandingIndex {
        k,
        l,
        offset,
        buckets,
    })
}

impl BandingIndex {
    /// Every pair sharing at least one bucket, once, sorted.
    pub fn pairs(&self) -> Vec<CandidatePair> {
        let raw = self
            .buckets
            .par_iter()
            .flat_map_iter(|band| band.values())
            .flat_map_iter(|members| {
                members.iter().enumerate().flat_map(move |(i, &x)| {
                    members[i + 1..]
                        .iter()
                        .map(move |&y| CandidatePair::new(x, y))
                })
            })
            .collect();
        sorted_unique(raw)
    }
}
