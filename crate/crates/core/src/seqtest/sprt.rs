//! Wald's SPRT for a binomial proportion, used for the composite test
//! `s ≥ t` vs `s < t` via the simple pair `s₀ = t − τ`, `s₁ = t + τ`.

use crate::error::{invalid, Result};

/// Linear continuation region `low + n·slope < m < high + n·slope` in the
/// cumulative match count `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtBoundaries {
    pub s0: f64,
    pub s1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub intercept_low: f64,
    pub intercept_high: f64,
    pub slope: f64,
}

/// Decision in the original orientation (`H0: s ≥ t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprtDecision {
    /// Upper boundary crossed: keep the pair.
    ConcludeAbove,
    /// Lower boundary crossed: prune the pair.
    ConcludeBelow,
    Continue,
}

/// Boundaries for threshold `t` with indifference offset `tau`.
///
/// The test runs with swapped hypotheses (`s = s₀` null, `s = s₁`
/// alternative); `beta` is the Type II error of that swapped test, i.e. the
/// probability of pruning a pair at `s₁`, and is normally set to the recall
/// budget.
pub fn sprt_boundaries(t: f64, tau: f64, alpha: f64, beta: f64) -> Result<SprtBoundaries> {
    let (s0, s1) = (t - tau, t + tau);
    if !(tau > 0.0 && s0 > 0.0 && s1 < 1.0) {
        return Err(invalid(format!(
            "t ± τ = ({s0}, {s1}) must lie strictly inside (0, 1)"
        )));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(invalid(format!("{name} = {v} must lie in (0, 0.5)")));
        }
    }
    let denom = (s1 / s0).ln() - ((1.0 - s1) / (1.0 - s0)).ln();
    Ok(SprtBoundaries {
        s0,
        s1,
        alpha,
        beta,
        intercept_low: (alpha / (1.0 - beta)).ln() / denom,
        intercept_high: ((1.0 - alpha) / beta).ln() / denom,
        slope: ((1.0 - s0) / (1.0 - s1)).ln() / denom,
    })
}

impl SprtBoundaries {
    pub fn lower(&self, n: u32) -> f64 {
        self.intercept_low + n as f64 * self.slope
    }

    pub fn upper(&self, n: u32) -> f64 {
        self.intercept_high + n as f64 * self.slope
    }
}

/// Compares the cumulative match count `m` after `n` comparisons against both
/// boundaries.
pub fn sprt_step(bounds: &SprtBoundaries, m: u32, n: u32) -> SprtDecision {
    let m = m as f64;
    if m >= bounds.upper(n) {
        SprtDecision::ConcludeAbove
    } else if m <= bounds.lower(n) {
        SprtDecision::ConcludeBelow
    } else {
        SprtDecision::Continue
    }
}
