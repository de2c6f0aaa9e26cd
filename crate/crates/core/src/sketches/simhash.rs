use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::vector::SparseVector;

use super::{dimension_key, HashFamily, Scheme, Signature};

/// Random-hyperplane sign signature of `v`.
///
/// Bit `i` is `sign(Σ_d w_d · g_i(d))` with `g_i(d)` standard normal. The
/// components for dimension `d` are drawn on the fly from a stream seeded by
/// `(seed, d)`, so no dense `h × D` matrix is materialised.
pub fn simhash_sign(v: &SparseVector, fam: &HashFamily) -> Result<Signature> {
    if fam.scheme != Scheme::SimHash {
        return Err(Error::SchemeMismatch(
            fam.scheme.as_str(),
            Scheme::SimHash.as_str(),
        ));
    }
    if v.entries().iter().all(|&(_, w)| w == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut acc = vec![0.0f64; fam.h];
    for &(d, w) in v.entries() {
        if w == 0.0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(dimension_key(fam.seed, d));
        for a in acc.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *a += w * g;
        }
    }
    let mut words = vec![0u64; Signature::words_for(Scheme::SimHash, fam.h)];
    for (i, &a) in acc.iter().enumerate() {
        if a > 0.0 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    Signature::from_raw(Scheme::SimHash, fam.h, words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketches::match_count;

    #[test]
    fn self_and_scaled_copies_match_everywhere() {
        let fam = HashFamily::new(Scheme::SimHash, 3, 256).unwrap();
        let v = SparseVector::new(1, vec![(2, 0.5), (9, 1.5), (40, 2.0)]).unwrap();
        let scaled = SparseVector::new(2, vec![(2, 1.5), (9, 4.5), (40, 6.0)]).unwrap();
        let a = simhash_sign(&v, &fam).unwrap();
        let b = simhash_sign(&scaled, &fam).unwrap();
        assert_eq!(a.words(), b.words());
        assert_eq!(match_count(&a, &a, 0, 256).unwrap(), 256);
    }

    #[test]
    fn orthogonal_vectors_match_half() {
        let fam = HashFamily::new(Scheme::SimHash, 77, 10_000).unwrap();
        let a = simhash_sign(&SparseVector::new(1, vec![(0, 1.0)]).unwrap(), &fam).unwrap();
        let b = simhash_sign(&SparseVector::new(2, vec![(1, 1.0)]).unwrap(), &fam).unwrap();
        let frac = match_count(&a, &b, 0, 10_000).unwrap() as f64 / 10_000.0;
        assert!((frac - 0.5).abs() <= 0.015, "fraction {frac}");
    }

    #[test]
    fn few_dimension_angle_is_unbiased() {
        // (1,1,1) vs (1,1,0): cos = 2/√6, native s = 1 - acos(2/√6)/π ≈ 0.8041.
        // ±1 hyperplanes would give 0.75 here; Gaussian ones give the exact angle.
        let fam = HashFamily::new(Scheme::SimHash, 9, 20_000).unwrap();
        let x = SparseVector::new(1, vec![(0, 1.0), (1, 1.0), (2, 1.0)]).unwrap();
        let y = SparseVector::new(2, vec![(0, 1.0), (1, 1.0)]).unwrap();
        let a = simhash_sign(&x, &fam).unwrap();
        let b = simhash_sign(&y, &fam).unwrap();
        let frac = match_count(&a, &b, 0, 20_000).unwrap() as f64 / 20_000.0;
        let s = 1.0 - (2.0 / 6f64.sqrt()).acos() / std::f64::consts::PI;
        // 3σ with σ = √(s(1-s)/20000) ≈ 0.0028
        assert!((frac - s).abs() <= 0.0085, "fraction {frac} vs {s}");
    }

    #[test]
    fn zero_vector_is_rejected() {
        let fam = HashFamily::new(Scheme::SimHash, 3, 64).unwrap();
        let v = SparseVector::new(1, vec![(2, 0.0)]).unwrap();
        assert!(matches!(simhash_sign(&v, &fam), Err(Error::ZeroVector)));
    }
}
