//! Stopping-set synthesis, path counting and exact coverage evaluation for
//! fixed-width sequential confidence intervals on a binomial proportion.
//!
//! A procedure compares hashes in batches of `b`, and after every batch asks
//! whether the Wald interval half-width `z·√(ŝₐ(1−ŝₐ)/n)` is at most the target
//! width, where `ŝₐ = (m+a)/(n+2a)`. The set of `(m, n)` states where it stops
//! (plus every reachable state at the horizon) fully determines the
//! procedure. Counting the match/mismatch sequences that reach each stopping
//! point without passing through an earlier one gives exact stopping
//! probabilities `H(m,n)·sᵐ(1−s)ⁿ⁻ᵐ`, and from them the exact coverage of the
//! reported interval for any true proportion `s`.
//!
//! Path counts are kept in log space: `C(256,128) ≈ 10⁷⁵` already overflows
//! every integer type, and longer horizons overflow `f64`.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::normal::upper_quantile;

/// Smallest nominal level tried during calibration.
pub const LAMBDA_MIN: f64 = 1e-6;
/// Calibration stops once the λ bracket is narrower than this.
pub const LAMBDA_TOL: f64 = 1e-5;
/// Offset used to probe each side of a coverage discontinuity.
pub const JUMP_EPS: f64 = 1e-10;

/// Batch size, truncation horizon and smoothing pseudo-count of a procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanShape {
    pub batch: u32,
    pub horizon: u32,
    pub pseudo: f64,
}

impl PlanShape {
    pub fn new(batch: u32, horizon: u32, pseudo: f64) -> Result<Self> {
        if batch == 0 || horizon == 0 {
            return Err(invalid("batch and horizon must be positive"));
        }
        if !horizon.is_multiple_of(batch) {
            return Err(invalid(format!(
                "batch {batch} must divide horizon {horizon}"
            )));
        }
        if !(pseudo.is_finite() && pseudo >= 0.0) {
            return Err(invalid(format!(
                "pseudo-count {pseudo} must be non-negative"
            )));
        }
        Ok(Self {
            batch,
            horizon,
            pseudo,
        })
    }
}

/// One-sided upper limit or two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sidedness {
    Upper,
    TwoSided,
}

/// The Wald stopping rule at a fixed nominal level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub sided: Sidedness,
    pub lambda: f64,
    pub width: f64,
    pub pseudo: f64,
    z: f64,
}

impl StopRule {
    pub fn new(sided: Sidedness, lambda: f64, width: f64, pseudo: f64) -> Self {
        let tail = match sided {
            Sidedness::Upper => lambda,
            Sidedness::TwoSided => lambda / 2.0,
        };
        Self {
            sided,
            lambda,
            width,
            pseudo,
            z: upper_quantile(tail),
        }
    }

    /// Critical value `z_λ` (one-sided) or `z_{λ/2}` (two-sided).
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn stops(&self, m: u32, n: u32) -> bool {
        wald_half_width(self.z, m, n, self.pseudo) <= self.width
    }
}

fn wald_half_width(z: f64, m: u32, n: u32, a: f64) -> f64 {
    let sa = (m as f64 + a) / (n as f64 + 2.0 * a);
    z * (sa * (1.0 - sa) / n as f64).sqrt()
}

/// One-sided Wald stopping rule: stop iff `z_λ·√(ŝₐ(1−ŝₐ)/n) ≤ w`.
pub fn wald_stop(m: u32, n: u32, lambda: f64, w: f64, a: f64) -> bool {
    wald_half_width(upper_quantile(lambda), m, n, a) <= w
}

/// A `(matches, comparisons)` state at which a procedure terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StopPoint {
    pub m: u32,
    pub n: u32,
}

impl StopPoint {
    pub fn ratio(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Runs the path-counting recurrence
/// `H(m,n+1) = H(m,n)·[¬stop(m,n)] + H(m−1,n)·[¬stop(m−1,n)]` from
/// `H(0,0) = 1`, calling `visit(n, ln_row, stop_row)` for `n = 1..=horizon`.
/// `is_stop` is only consulted for reachable states.
fn sweep(
    horizon: u32,
    mut is_stop: impl FnMut(u32, u32) -> bool,
    mut visit: impl FnMut(u32, &[f64], &[bool]),
) {
    let mut prev = vec![0.0f64];
    let mut prev_stop = vec![false];
    for n in 1..=horizon {
        let mut row = vec![f64::NEG_INFINITY; n as usize + 1];
        for (m, cell) in row.iter_mut().enumerate() {
            let stay = if m < prev.len() && !prev_stop[m] {
                prev[m]
            } else {
                f64::NEG_INFINITY
            };
            let step = if m >= 1 && !prev_stop[m - 1] {
                prev[m - 1]
            } else {
                f64::NEG_INFINITY
            };
            *cell = log_add(stay, step);
        }
        let stops: Vec<bool> = row
            .iter()
            .enumerate()
            .map(|(m, &ln)| ln > f64::NEG_INFINITY && is_stop(m as u32, n))
            .collect();
        visit(n, &row, &stops);
        prev = row;
        prev_stop = stops;
    }
}

/// Stopping points of the batched Wald procedure: reachable `(m, n)` with `n`
/// a multiple of the batch size where the rule fires, plus every reachable
/// state at the horizon. Sorted by `(n, m)`.
pub fn enumerate_stops(rule: &StopRule, shape: &PlanShape) -> Vec<StopPoint> {
    let mut points = Vec::new();
    sweep(
        shape.horizon,
        |m, n| n % shape.batch == 0 && (n == shape.horizon || rule.stops(m, n)),
        |n, _, stops| {
            points.extend(
                stops
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s)
                    .map(|(m, _)| StopPoint { m: m as u32, n }),
            );
        },
    );
    points
}

/// Full table of log path counts `ln H(m,n)` for `0 ≤ m ≤ n ≤ horizon`.
#[derive(Debug, Clone)]
pub struct PathCounts {
    rows: Vec<Vec<f64>>,
}

impl PathCounts {
    pub fn horizon(&self) -> u32 {
        self.rows.len() as u32 - 1
    }

    pub fn ln_count(&self, m: u32, n: u32) -> f64 {
        self.rows
            .get(n as usize)
            .and_then(|r| r.get(m as usize))
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn count(&self, m: u32, n: u32) -> f64 {
        self.ln_count(m, n).exp()
    }
}

/// Number of match sequences reaching each `(m, n)` without passing through
/// an earlier stopping point (sequences may end on one).
pub fn path_counts(points: &[StopPoint], horizon: u32) -> PathCounts {
    let set: HashSet<StopPoint> = points.iter().copied().collect();
    let mut rows = vec![vec![0.0]];
    sweep(
        horizon,
        |m, n| set.contains(&StopPoint { m, n }),
        |_, row, _| rows.push(row.to_vec()),
    );
    PathCounts { rows }
}

/// Exact integer path counts, for horizons up to 127.
pub fn path_counts_exact(points: &[StopPoint], horizon: u32) -> Result<Vec<Vec<u128>>> {
    if horizon > 127 {
        return Err(invalid("exact path counts are limited to horizon ≤ 127"));
    }
    let set: HashSet<StopPoint> = points.iter().copied().collect();
    let mut rows: Vec<Vec<u128>> = vec![vec![1]];
    for n in 0..horizon {
        let prev = &rows[n as usize];
        let live = |m: usize| {
            if set.contains(&StopPoint { m: m as u32, n }) {
                0
            } else {
                prev[m]
            }
        };
        let row = (0..=n as usize + 1)
            .map(|m| {
                let stay = if m <= n as usize { live(m) } else { 0 };
                let step = if m >= 1 { live(m - 1) } else { 0 };
                stay + step
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Which reported interval's coverage is being measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    /// `s ≤ m/n + w`.
    Upper { width: f64 },
    /// `|s − m/n| ≤ δ`.
    TwoSided { half_width: f64 },
}

impl Interval {
    fn covers(&self, ratio: f64, s: f64) -> bool {
        match *self {
            Interval::Upper { width } => s <= ratio + width,
            Interval::TwoSided { half_width } => (s - ratio).abs() <= half_width,
        }
    }

    fn jumps(&self, ratio: f64, out: &mut Vec<f64>) {
        match *self {
            Interval::Upper { width } => out.push(ratio + width),
            Interval::TwoSided { half_width } => {
                out.push(ratio - half_width);
                out.push(ratio + half_width);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Weighted {
    m: f64,
    rest: f64,
    ln_h: f64,
    ratio: f64,
}

/// A closed set of stopping points with their path counts.
#[derive(Debug, Clone)]
pub struct StoppingSet {
    batch: u32,
    horizon: u32,
    points: Vec<StopPoint>,
    ln_counts: Vec<f64>,
    flags: Vec<Vec<bool>>,
}

impl StoppingSet {
    /// Enumerates the stopping points of `rule` and counts paths in one sweep.
    pub fn synthesize(rule: &StopRule, shape: &PlanShape) -> Self {
        let mut points = Vec::new();
        let mut ln_counts = Vec::new();
        let mut flags = vec![Vec::new(); shape.horizon as usize + 1];
        sweep(
            shape.horizon,
            |m, n| n % shape.batch == 0 && (n == shape.horizon || rule.stops(m, n)),
            |n, row, stops| {
                if stops.iter().any(|&s| s) {
                    flags[n as usize] = stops.to_vec();
                }
                for (m, _) in stops.iter().enumerate().filter(|(_, &s)| s) {
                    points.push(StopPoint { m: m as u32, n });
                    ln_counts.push(row[m]);
                }
            },
        );
        Self {
            batch: shape.batch,
            horizon: shape.horizon,
            points,
            ln_counts,
            flags,
        }
    }

    /// Builds a set from explicit points. Unreachable points are dropped; every
    /// path must terminate by the horizon.
    pub fn from_points(points: &[StopPoint], batch: u32, horizon: u32) -> Result<Self> {
        let set: HashSet<StopPoint> = points.iter().copied().collect();
        let mut kept = Vec::new();
        let mut ln_counts = Vec::new();
        let mut flags = vec![Vec::new(); horizon as usize + 1];
        let mut open_at_horizon = false;
        sweep(
            horizon,
            |m, n| set.contains(&StopPoint { m, n }),
            |n, row, stops| {
                if stops.iter().any(|&s| s) {
                    flags[n as usize] = stops.to_vec();
                }
                for (m, &s) in stops.iter().enumerate() {
                    if s {
                        kept.push(StopPoint { m: m as u32, n });
                        ln_counts.push(row[m]);
                    } else if n == horizon && row[m] > f64::NEG_INFINITY {
                        open_at_horizon = true;
                    }
                }
            },
        );
        if open_at_horizon {
            return Err(invalid("stopping set leaves paths open at the horizon"));
        }
        Ok(Self {
            batch,
            horizon,
            points: kept,
            ln_counts,
            flags,
        })
    }

    pub fn batch(&self) -> u32 {
        self.batch
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn points(&self) -> &[StopPoint] {
        &self.points
    }

    /// `ln H(mᵢ,nᵢ)` aligned with [`points`](Self::points).
    pub fn ln_counts(&self) -> &[f64] {
        &self.ln_counts
    }

    pub fn is_stop(&self, m: u32, n: u32) -> bool {
        self.flags
            .get(n as usize)
            .and_then(|r| r.get(m as usize))
            .copied()
            .unwrap_or(false)
    }

    fn weighted(&self) -> Vec<Weighted> {
        self.points
            .iter()
            .zip(&self.ln_counts)
            .map(|(p, &ln_h)| Weighted {
                m: p.m as f64,
                rest: (p.n - p.m) as f64,
                ln_h,
                ratio: p.ratio(),
            })
            .collect()
    }

    /// `Σᵢ H(mᵢ,nᵢ)·s^mᵢ·(1−s)^(nᵢ−mᵢ)`; equals 1 for a closed set.
    pub fn total_probability(&self, s: f64) -> f64 {
        let (ln_s, ln_q) = (s.ln(), (1.0 - s).ln());
        self.weighted()
            .iter()
            .map(|w| stop_probability(w, ln_s, ln_q))
            .sum()
    }

    /// Exact coverage `T(s)` of the reported interval.
    pub fn coverage_at(&self, interval: Interval, s: f64) -> f64 {
        coverage_with(&self.weighted(), interval, s)
    }

    /// `min_s T(s)` evaluated just either side of every discontinuity of the
    /// piecewise-polynomial `T`, and at every stopping ratio and both ends.
    /// Returns `(coverage, argmin)`.
    pub fn min_coverage(&self, interval: Interval) -> (f64, f64) {
        let weighted = self.weighted();
        let mut jumps = vec![0.0, 1.0];
        for w in &weighted {
            jumps.push(w.ratio);
            interval.jumps(w.ratio, &mut jumps);
        }
        let mut probes: Vec<f64> = jumps
            .into_iter()
            .filter(|c| (0.0..=1.0).contains(c))
            .flat_map(|c| [c - JUMP_EPS, c + JUMP_EPS])
            .map(|s| s.clamp(0.0, 1.0))
            .collect();
        probes.sort_by(f64::total_cmp);
        probes.dedup();
        probes
            .par_iter()
            .map(|&s| (coverage_with(&weighted, interval, s), s))
            .reduce(
                || (f64::INFINITY, f64::NAN),
                |a, b| if b.0 < a.0 { b } else { a },
            )
    }
}

#[inline]
fn stop_probability(w: &Weighted, ln_s: f64, ln_q: f64) -> f64 {
    // 0·ln 0 is taken as 0 so that s ∈ {0, 1} is handled exactly.
    let a = if w.m == 0.0 { 0.0 } else { w.m * ln_s };
    let b = if w.rest == 0.0 { 0.0 } else { w.rest * ln_q };
    (w.ln_h + a + b).exp()
}

fn coverage_with(weighted: &[Weighted], interval: Interval, s: f64) -> f64 {
    let (ln_s, ln_q) = (s.ln(), (1.0 - s).ln());
    weighted
        .iter()
        .filter(|w| interval.covers(w.ratio, s))
        .map(|w| stop_probability(w, ln_s, ln_q))
        .sum()
}

/// Coverage probability `CP(λ) = min_s T(s, λ)` of the procedure with the
/// given rule.
pub fn coverage(rule: &StopRule, shape: &PlanShape) -> f64 {
    let set = StoppingSet::synthesize(rule, shape);
    set.min_coverage(interval_for(rule)).0
}

fn interval_for(rule: &StopRule) -> Interval {
    match rule.sided {
        Sidedness::Upper => Interval::Upper { width: rule.width },
        Sidedness::TwoSided => Interval::TwoSided {
            half_width: rule.width,
        },
    }
}

/// Outcome of calibrating λ for a target level.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub rule: StopRule,
    pub coverage: f64,
    /// `false` when even `λ = LAMBDA_MIN` misses the target coverage.
    pub attainable: bool,
    pub set: StoppingSet,
}

/// Bisects λ on `[LAMBDA_MIN, alpha]` for the largest level whose exact
/// coverage is still at least `1 − alpha`, keeping the conservative endpoint.
pub fn calibrate(
    sided: Sidedness,
    width: f64,
    alpha: f64,
    shape: &PlanShape,
) -> Result<Calibration> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(format!("level {alpha} must lie in (0, 0.5)")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(invalid(format!("width {width} must be positive")));
    }
    let target = 1.0 - alpha;
    let evaluate = |lambda: f64| {
        let rule = StopRule::new(sided, lambda, width, shape.pseudo);
        let set = StoppingSet::synthesize(&rule, shape);
        let cp = set.min_coverage(interval_for(&rule)).0;
        Calibration {
            rule,
            coverage: cp,
            attainable: cp >= target,
            set,
        }
    };

    let top = evaluate(alpha);
    if top.attainable {
        return Ok(top);
    }
    let mut lo = evaluate(LAMBDA_MIN);
    if !lo.attainable {
        return Ok(lo);
    }
    let mut hi = alpha;
    while hi - lo.rule.lambda >= LAMBDA_TOL {
        let mid = 0.5 * (lo.rule.lambda + hi);
        let probe = evaluate(mid);
        if probe.attainable {
            lo = probe;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(b: u32, h: u32) -> PlanShape {
        PlanShape::new(b, h, 4.0).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(PlanShape::new(32, 250, 4.0).is_err());
        assert!(PlanShape::new(0, 256, 4.0).is_err());
        assert!(PlanShape::new(32, 256, -1.0).is_err());
    }

    #[test]
    fn wald_stop_examples() {
        // ŝₐ = 4/40 = 0.1, z_0.05 ≈ 1.6449: half-width 1.6449·√(0.09/32) ≈ 0.0872
        assert!(wald_stop(0, 32, 0.05, 0.15, 4.0));
        assert!(!wald_stop(0, 32, 0.05, 0.05, 4.0));
        // maximal variance: m + a = (n + 2a)/2 stops iff n ≥ (z/(2w))²
        let z = upper_quantile(0.05);
        let w = 0.1;
        let n_star = (z / (2.0 * w)).powi(2).ceil() as u32; // 68
        for n in [n_star - 2, n_star, n_star + 2] {
            let m = n / 2; // a = 4 keeps ŝₐ = ½ for even n
            assert_eq!(wald_stop(m, n, 0.05, w, 4.0), n >= n_star, "n={n}");
        }
    }

    #[test]
    fn stop_everywhere_at_two_is_binomial() {
        let pts = [
            StopPoint { m: 0, n: 2 },
            StopPoint { m: 1, n: 2 },
            StopPoint { m: 2, n: 2 },
        ];
        let pc = path_counts(&pts, 2);
        assert_eq!(pc.count(0, 2).round(), 1.0);
        assert_eq!(pc.count(1, 2).round(), 2.0);
        assert_eq!(pc.count(2, 2).round(), 1.0);
        assert_eq!(pc.count(0, 1).round(), 1.0);
        assert_eq!(pc.count(1, 1).round(), 1.0);
        let set = StoppingSet::from_points(&pts, 1, 2).unwrap();
        for s in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            assert!((set.total_probability(s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn no_early_stops_gives_binomial_coefficients() {
        let h = 40;
        let pts: Vec<_> = (0..=h).map(|m| StopPoint { m, n: h }).collect();
        let exact = path_counts_exact(&pts, h).unwrap();
        let logs = path_counts(&pts, h);
        for n in 0..=h {
            let mut c: u128 = 1;
            for m in 0..=n {
                assert_eq!(exact[n as usize][m as usize], c);
                assert!((logs.count(m, n) / c as f64 - 1.0).abs() < 1e-12);
                c = c * (n - m) as u128 / (m + 1) as u128;
            }
        }
    }

    #[test]
    fn open_sets_are_rejected() {
        let pts = [StopPoint { m: 0, n: 2 }, StopPoint { m: 2, n: 2 }];
        assert!(StoppingSet::from_points(&pts, 1, 2).is_err());
    }

    #[test]
    fn saturated_first_batch() {
        // w ≥ z/2·√(1/b) makes every first-batch state stop.
        let lambda = 0.05;
        let b = 16;
        let w = upper_quantile(lambda) / 2.0 / (b as f64).sqrt();
        let rule = StopRule::new(Sidedness::Upper, lambda, w + 1e-12, 4.0);
        let pts = enumerate_stops(&rule, &shape(b, 64));
        let expect: Vec<_> = (0..=b).map(|m| StopPoint { m, n: b }).collect();
        assert_eq!(pts, expect);
    }

    #[test]
    fn tiny_width_only_stops_at_horizon() {
        let rule = StopRule::new(Sidedness::Upper, 0.05, 1e-9, 4.0);
        let pts = enumerate_stops(&rule, &shape(8, 64));
        assert_eq!(pts.len(), 65);
        assert!(pts.iter().all(|p| p.n == 64));
    }

    #[test]
    fn full_width_has_full_coverage() {
        let rule = StopRule::new(Sidedness::Upper, 0.05, 1.0, 4.0);
        assert!((coverage(&rule, &shape(32, 256)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_plan_coverage_matches_closed_form() {
        // stop everywhere at n = 2, upper interval width 0.5:
        // T(s) = (1−s)²·[s ≤ 0.5] + 2s(1−s)·[s ≤ 1] + s²
        let pts = [
            StopPoint { m: 0, n: 2 },
            StopPoint { m: 1, n: 2 },
            StopPoint { m: 2, n: 2 },
        ];
        let set = StoppingSet::from_points(&pts, 2, 2).unwrap();
        let t = |s: f64| {
            if s <= 0.5 {
                1.0
            } else {
                2.0 * s * (1.0 - s) + s * s
            }
        };
        let (cp, at) = set.min_coverage(Interval::Upper { width: 0.5 });
        let expected = t(0.5 + JUMP_EPS);
        assert!((cp - expected).abs() < 1e-15, "{cp} vs {expected}");
        assert!((at - 0.5).abs() < 1e-9);
        assert!((expected - 0.75).abs() < 1e-9);
    }
}
