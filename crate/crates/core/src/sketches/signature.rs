use crate::error::{Error, Result};

use super::Scheme;

/// One object's sketch: `h` min-hash keys, or `h` sign bits packed into
/// little-endian 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    scheme: Scheme,
    h: usize,
    values: Vec<u64>,
}

impl Signature {
    pub(crate) fn from_raw(scheme: Scheme, h: usize, values: Vec<u64>) -> Result<Self> {
        let expected = Self::words_for(scheme, h);
        if values.len() != expected {
            return Err(Error::LengthMismatch(values.len(), expected));
        }
        Ok(Self { scheme, h, values })
    }

    /// Number of stored 64-bit words for `h` hashes.
    pub fn words_for(scheme: Scheme, h: usize) -> usize {
        match scheme {
            Scheme::MinHash => h,
            Scheme::SimHash => h.div_ceil(64),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Total hash count.
    pub fn len(&self) -> usize {
        self.h
    }

    pub fn is_empty(&self) -> bool {
        self.h == 0
    }

    /// Raw words: keys for MinHash, packed bits for SimHash.
    pub fn words(&self) -> &[u64] {
        &self.values
    }

    /// Hash value at index `i` (a key, or a single bit as 0/1).
    pub fn value(&self, i: usize) -> u64 {
        match self.scheme {
            Scheme::MinHash => self.values[i],
            Scheme::SimHash => (self.values[i / 64] >> (i % 64)) & 1,
        }
    }

    /// Matches in `[from, upto)` without validation; callers guarantee bounds.
    pub(crate) fn matches_unchecked(&self, other: &Signature, from: usize, upto: usize) -> u32 {
        match self.scheme {
            Scheme::MinHash => self.values[from..upto]
                .iter()
                .zip(&other.values[from..upto])
                .filter(|(a, b)| a == b)
                .count() as u32,
            Scheme::SimHash => bit_matches(&self.values, &other.values, from, upto),
        }
    }
}

fn bit_matches(a: &[u64], b: &[u64], from: usize, upto: usize) -> u32 {
    if from >= upto {
        return 0;
    }
    let first = from / 64;
    let last = (upto - 1) / 64;
    let mut total = 0;
    for w in first..=last {
        let mut mask = u64::MAX;
        if w == first {
            mask &= u64::MAX << (from % 64);
        }
        if w == last {
            let end = upto - w * 64;
            if end < 64 {
                mask &= (1u64 << end) - 1;
            }
        }
        total += (!(a[w] ^ b[w]) & mask).count_ones();
    }
    total
}

/// Number of positions in `[from, upto)` where the two signatures agree.
pub fn match_count(a: &Signature, b: &Signature, from: usize, upto: usize) -> Result<u32> {
    if a.scheme != b.scheme {
        return Err(Error::SchemeMismatch(a.scheme.as_str(), b.scheme.as_str()));
    }
    if a.h != b.h {
        return Err(Error::LengthMismatch(a.h, b.h));
    }
    if from >= upto || upto > a.h {
        return Err(Error::RangeOutOfBounds {
            from,
            upto,
            len: a.h,
        });
    }
    Ok(a.matches_unchecked(b, from, upto))
}
