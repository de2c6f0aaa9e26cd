//! Maps between cosine similarity `r` and the SimHash collision scale
//! `s = 1 − arccos(r)/π`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::vector::Measure;

/// `s = 1 − arccos(r)/π` for `r ∈ [0, 1]`.
pub fn cosine_to_native(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("cosine {r} outside [0, 1]")));
    }
    Ok(1.0 - r.acos() / PI)
}

/// `r = cos(π(1 − s))` for `s ∈ [0.5, 1]`.
pub fn native_to_cosine(s: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&s) {
        return Err(invalid(format!(
            "collision probability {s} outside [0.5, 1]"
        )));
    }
    Ok((PI * (1.0 - s)).cos())
}

/// Threshold on the hash-collision scale for a user threshold.
pub fn transform_threshold(t: f64, measure: Measure) -> Result<f64> {
    match measure {
        Measure::Jaccard => Ok(t),
        Measure::Cosine => cosine_to_native(t),
    }
}

/// Largest `δ_s` such that an interval `ŝ ± δ_s` around `ŝ = 0.5` maps to a
/// cosine interval no wider than `2δ`. Bisection to `1e-12`.
pub fn solve_delta_s(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid(format!("delta {delta} must lie in (0, 0.5)")));
    }
    let width = |ds: f64| {
        let hi = (PI * (1.0 - (0.5 + ds).min(1.0))).cos();
        let lo = (PI * (1.0 - (0.5 - ds).max(0.5))).cos();
        hi - lo
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if width(mid) <= 2.0 * delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
