use crate::error::{Error, Result};
use crate::vector::SparseVector;

use super::{dimension_key, index_seed, mix64, HashFamily, Scheme, Signature};

/// Min-wise hash signature of the dimension set of `v`.
///
/// Permutation `i` is a seeded 64-bit mixing hash; `values[i]` is the minimum
/// of it over the dimensions of `v`. Weights are ignored (set semantics).
pub fn minhash_sign(v: &SparseVector, fam: &HashFamily) -> Result<Signature> {
    if fam.scheme != Scheme::MinHash {
        return Err(Error::SchemeMismatch(
            fam.scheme.as_str(),
            Scheme::MinHash.as_str(),
        ));
    }
    if v.is_empty() {
        return Err(Error::EmptySet);
    }
    let keys: Vec<u64> = v.dims().map(|d| dimension_key(fam.seed, d)).collect();
    let values = (0..fam.h)
        .map(|i| {
            let s = index_seed(fam.seed, i);
            keys.iter().map(|&k| mix64(k ^ s)).min().expect("non-empty")
        })
        .collect();
    Signature::from_raw(Scheme::MinHash, fam.h, values)
}
