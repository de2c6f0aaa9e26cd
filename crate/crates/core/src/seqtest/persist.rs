//! On-disk plan caches.
//!
//! ```text
//! magic "SQPC", version u32
//! alpha f64, batch u32, horizon u32, pseudo f64, plan count u32
//! per plan: width f64, lambda f64, coverage f64, point count u32,
//!           points (m u32, n u32)…
//! ```
//!
//! Path counts are recomputed from the points on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::engine::{PlanShape, StopPoint, StoppingSet};
use super::plan::{PlanCache, StoppingPlan};

const MAGIC: &[u8; 4] = b"SQPC";
const VERSION: u32 = 1;

pub fn write_plan_cache<W: Write>(mut out: W, cache: &PlanCache) -> Result<()> {
    let shape = cache.shape();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&cache.alpha().to_le_bytes())?;
    out.write_all(&shape.batch.to_le_bytes())?;
    out.write_all(&shape.horizon.to_le_bytes())?;
    out.write_all(&shape.pseudo.to_le_bytes())?;
    out.write_all(&(cache.plans().len() as u32).to_le_bytes())?;
    for plan in cache.plans() {
        out.write_all(&plan.width.to_le_bytes())?;
        out.write_all(&plan.lambda.to_le_bytes())?;
        out.write_all(&plan.coverage.to_le_bytes())?;
        out.write_all(&(plan.points().len() as u32).to_le_bytes())?;
        for p in plan.points() {
            out.write_all(&p.m.to_le_bytes())?;
            out.write_all(&p.n.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_plan_cache<R: Read>(mut input: R) -> Result<PlanCache> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not a plan cache".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported plan cache version {version}"
        )));
    }
    let alpha = read_f64(&mut input)?;
    let batch = read_u32(&mut input)?;
    let horizon = read_u32(&mut input)?;
    let pseudo = read_f64(&mut input)?;
    let shape = PlanShape::new(batch, horizon, pseudo).map_err(|e| Error::Format(e.to_string()))?;
    let count = read_u32(&mut input)?;
    let mut plans = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let width = read_f64(&mut input)?;
        let lambda = read_f64(&mut input)?;
        let coverage = read_f64(&mut input)?;
        let npoints = read_u32(&mut input)?;
        let mut points = Vec::with_capacity(npoints as usize);
        for _ in 0..npoints {
            let m = read_u32(&mut input)?;
            let n = read_u32(&mut input)?;
            if m > n || n > horizon || n % batch != 0 {
                return Err(Error::Format(format!("invalid stopping point ({m}, {n})")));
            }
            points.push(StopPoint { m, n });
        }
        let set = StoppingSet::from_points(&points, batch, horizon)
            .map_err(|e| Error::Format(e.to_string()))?;
        plans.push(StoppingPlan::from_parts(
            width, lambda, alpha, shape, coverage, set,
        ));
    }
    PlanCache::from_plans(alpha, shape, plans).map_err(|e| Error::Format(e.to_string()))
}

/// Loads the cache at `path` if its key matches, otherwise builds it and
/// writes it there.
pub fn load_or_build(path: &Path, alpha: f64, shape: PlanShape, grid: &[f64]) -> Result<PlanCache> {
    if let Ok(file) = File::open(path) {
        if let Ok(cache) = read_plan_cache(BufReader::new(file)) {
            if cache.alpha() == alpha && cache.shape() == shape && cache.widths() == grid {
                return Ok(cache);
            }
        }
    }
    let cache = PlanCache::build(alpha, shape, grid)?;
    write_plan_cache(BufWriter::new(File::create(path)?), &cache)?;
    Ok(cache)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
