//! Binary sketch files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic  "SQLH"      4 bytes
//! scheme u8          0 = MinHash, 1 = SimHash
//! h      u32         hash count
//! seed   u64
//! count  u64         number of records
//! record: id u64, then words u64 × (h for MinHash, ⌈h/64⌉ for SimHash)
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::{HashFamily, Scheme, Signature};

const MAGIC: &[u8; 4] = b"SQLH";

/// Signatures of a corpus together with the family that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchSet {
    pub family: HashFamily,
    pub ids: Vec<u64>,
    pub signatures: Vec<Signature>,
}

pub fn write_sketches<W: Write>(mut out: W, set: &SketchSet) -> Result<()> {
    if set.ids.len() != set.signatures.len() {
        return Err(Error::Format("id/signature count mismatch".into()));
    }
    let h = u32::try_from(set.family.h).map_err(|_| Error::Format("h exceeds u32".into()))?;
    out.write_all(MAGIC)?;
    out.write_all(&[set.family.scheme.tag()])?;
    out.write_all(&h.to_le_bytes())?;
    out.write_all(&set.family.seed.to_le_bytes())?;
    out.write_all(&(set.ids.len() as u64).to_le_bytes())?;
    for (id, sig) in set.ids.iter().zip(&set.signatures) {
        if sig.scheme() != set.family.scheme || sig.len() != set.family.h {
            return Err(Error::Format(format!(
                "signature of {id} does not match the family"
            )));
        }
        out.write_all(&id.to_le_bytes())?;
        for w in sig.words() {
            out.write_all(&w.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_sketches<R: Read>(mut input: R) -> Result<SketchSet> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not a sketch file".into()));
    }
    let mut tag = [0u8; 1];
    input.read_exact(&mut tag)?;
    let scheme = Scheme::from_tag(tag[0])
        .ok_or_else(|| Error::Format(format!("unknown scheme byte {}", tag[0])))?;
    let h = read_u32(&mut input)? as usize;
    let seed = read_u64(&mut input)?;
    let count = read_u64(&mut input)?;
    let family = HashFamily::new(scheme, seed, h).map_err(|e| Error::Format(e.to_string()))?;
    let words = Signature::words_for(scheme, h);

    let mut ids = Vec::new();
    let mut signatures = Vec::new();
    for _ in 0..count {
        ids.push(read_u64(&mut input)?);
        let mut values = Vec::with_capacity(words);
        for _ in 0..words {
            values.push(read_u64(&mut input)?);
        }
        signatures.push(Signature::from_raw(scheme, h, values)?);
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after last record".into()));
    }
    Ok(SketchSet {
        family,
        ids,
        signatures,
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
