//! Per-pair sequential pruning decisions over a stream of batch match counts.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

use super::plan::{PlanCache, StoppingPlan};
use super::sprt::{sprt_step, SprtBoundaries, SprtDecision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Concluded `s < t`; the pair is discarded.
    Pruned,
    /// Concluded (or failed to reject) `s ≥ t` before the horizon.
    KeptForExact,
    /// Horizon reached without a pruning decision.
    Truncated,
}

/// Which test produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    Sprt,
    OneSidedCi { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneVerdict {
    pub outcome: Outcome,
    pub n_used: u32,
    pub m: u32,
    pub route: Route,
}

impl PruneVerdict {
    pub fn estimate(&self) -> f64 {
        self.m as f64 / self.n_used as f64
    }
}

/// Running `(m, n)` state over a stream of batch match counts.
struct Counter<I> {
    stream: I,
    batch: u32,
    m: u32,
    n: u32,
}

impl<I: Iterator<Item = u32>> Counter<I> {
    fn new(stream: I, batch: u32) -> Self {
        Self {
            stream,
            batch,
            m: 0,
            n: 0,
        }
    }

    fn pull(&mut self) -> Result<()> {
        let c = self
            .stream
            .next()
            .ok_or(Error::SignatureExhausted(self.n))?;
        if c > self.batch {
            return Err(invalid(format!(
                "batch count {c} exceeds batch size {}",
                self.batch
            )));
        }
        self.m += c;
        self.n += self.batch;
        Ok(())
    }
}

fn run_ci<I: Iterator<Item = u32>>(
    plan: &StoppingPlan,
    t: f64,
    c: &mut Counter<I>,
) -> Result<PruneVerdict> {
    let horizon = plan.horizon();
    loop {
        if c.n > 0 && (c.n >= horizon || plan.is_stop(c.m, c.n)) {
            let upper = (c.m as f64 / c.n as f64 + plan.width).min(1.0);
            let outcome = if upper < t {
                Outcome::Pruned
            } else if c.n >= horizon {
                Outcome::Truncated
            } else {
                Outcome::KeptForExact
            };
            return Ok(PruneVerdict {
                outcome,
                n_used: c.n,
                m: c.m,
                route: Route::OneSidedCi { width: plan.width },
            });
        }
        c.pull()?;
    }
}

fn run_sprt<I: Iterator<Item = u32>>(
    bounds: &SprtBoundaries,
    horizon: u32,
    c: &mut Counter<I>,
) -> Result<PruneVerdict> {
    loop {
        if c.n > 0 {
            let outcome = match sprt_step(bounds, c.m, c.n) {
                SprtDecision::ConcludeAbove => Some(Outcome::KeptForExact),
                SprtDecision::ConcludeBelow => Some(Outcome::Pruned),
                SprtDecision::Continue if c.n >= horizon => Some(Outcome::Truncated),
                SprtDecision::Continue => None,
            };
            if let Some(outcome) = outcome {
                return Ok(PruneVerdict {
                    outcome,
                    n_used: c.n,
                    m: c.m,
                    route: Route::Sprt,
                });
            }
        }
        c.pull()?;
    }
}

/// Level-α test of `H0: s ≥ t` from a one-sided fixed-width upper limit:
/// prune iff `min(ŝ + w, 1) < t` at the stopping point.
pub fn ci_ht_decide<I>(plan: &StoppingPlan, t: f64, stream: I) -> Result<PruneVerdict>
where
    I: IntoIterator<Item = u32>,
{
    run_ci(plan, t, &mut Counter::new(stream.into_iter(), plan.batch()))
}

/// SPRT from the first batch up to `horizon`.
pub fn sprt_decide<I>(
    bounds: &SprtBoundaries,
    batch: u32,
    horizon: u32,
    stream: I,
) -> Result<PruneVerdict>
where
    I: IntoIterator<Item = u32>,
{
    run_sprt(
        bounds,
        horizon,
        &mut Counter::new(stream.into_iter(), batch),
    )
}

/// Widest one-sided interval that can still reject `s ≥ t` given a crude
/// first-batch estimate. Non-positive results mean no CI test applies.
pub fn choose_width(t: f64, s_first_batch: f64, epsilon: f64) -> f64 {
    t - s_first_batch - epsilon
}

/// Hybrid test: after the first batch, use the cached one-sided CI test when
/// the chosen width is at least `mu`, otherwise SPRT. First-batch counts are
/// the starting state of whichever test runs.
pub fn hybrid_decide<I>(
    cache: &PlanCache,
    sprt: &SprtBoundaries,
    mu: f64,
    epsilon: f64,
    t: f64,
    stream: I,
) -> Result<PruneVerdict>
where
    I: IntoIterator<Item = u32>,
{
    let shape = cache.shape();
    let mut c = Counter::new(stream.into_iter(), shape.batch);
    c.pull()?;
    let w = choose_width(t, c.m as f64 / c.n as f64, epsilon);
    if w >= mu {
        if let Some(plan) = cache.lookup(w).filter(|p| p.attainable) {
            return run_ci(plan, t, &mut c);
        }
    }
    run_sprt(sprt, shape.horizon, &mut c)
}

/// Pure one-sided CI strategy: every pair whose chosen width admits an
/// attainable cached plan gets the CI test. Pairs with no such plan (width
/// below the grid, non-positive, or unattainable) fall back to SPRT.
pub fn one_sided_decide<I>(
    cache: &PlanCache,
    sprt: &SprtBoundaries,
    epsilon: f64,
    t: f64,
    stream: I,
) -> Result<PruneVerdict>
where
    I: IntoIterator<Item = u32>,
{
    let shape = cache.shape();
    let mut c = Counter::new(stream.into_iter(), shape.batch);
    c.pull()?;
    let w = choose_width(t, c.m as f64 / c.n as f64, epsilon);
    match cache.lookup(w).filter(|p| p.attainable) {
        Some(plan) => run_ci(plan, t, &mut c),
        None => run_sprt(sprt, shape.horizon, &mut c),
    }
}

/// Pruning strategy for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Sprt,
    OneSidedCi,
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Sprt, Strategy::OneSidedCi, Strategy::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Sprt => "sprt",
            Strategy::OneSidedCi => "ci",
            Strategy::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sprt" => Ok(Strategy::Sprt),
            "ci" | "one-sided-ci" | "onesidedci" => Ok(Strategy::OneSidedCi),
            "hybrid" => Ok(Strategy::Hybrid),
            other => Err(invalid(format!("unknown strategy `{other}`"))),
        }
    }
}

/// A configured pruning test, shared read-only across worker threads.
#[derive(Debug, Clone, Copy)]
pub struct Pruner<'a> {
    pub strategy: Strategy,
    pub cache: &'a PlanCache,
    pub sprt: SprtBoundaries,
    pub threshold: f64,
    pub mu: f64,
    pub epsilon: f64,
}

impl Pruner<'_> {
    pub fn decide<I: IntoIterator<Item = u32>>(&self, stream: I) -> Result<PruneVerdict> {
        let shape = self.cache.shape();
        match self.strategy {
            Strategy::Sprt => sprt_decide(&self.sprt, shape.batch, shape.horizon, stream),
            Strategy::OneSidedCi => {
                one_sided_decide(self.cache, &self.sprt, self.epsilon, self.threshold, stream)
            }
            Strategy::Hybrid => hybrid_decide(
                self.cache,
                &self.sprt,
                self.mu,
                self.epsilon,
                self.threshold,
                stream,
            ),
        }
    }
}
