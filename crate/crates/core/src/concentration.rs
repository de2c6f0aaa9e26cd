//! Fixed-width two-sided estimation of a pair's similarity from its sketch,
//! with truncation of the sequential procedure at the last stopping point
//! that can still accept a pair at threshold `t`.

use crate::error::{invalid, Error, Result};
use crate::seqtest::engine::{calibrate, Interval, PlanShape, Sidedness, StoppingSet};

/// Calibrated two-sided procedure: at its stopping point, `|s − ŝ| ≤ delta`
/// with probability at least `1 − gamma` for every `s` when `attainable`.
#[derive(Debug, Clone)]
pub struct EstimationPlan {
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub shape: PlanShape,
    pub coverage: f64,
    pub attainable: bool,
    stops: StoppingSet,
}

impl EstimationPlan {
    pub fn stopping_set(&self) -> &StoppingSet {
        &self.stops
    }

    pub fn is_stop(&self, m: u32, n: u32) -> bool {
        n >= self.shape.horizon || self.stops.is_stop(m, n)
    }

    /// Exact probability that the reported interval covers `s`.
    pub fn coverage_at(&self, s: f64) -> f64 {
        self.stops.coverage_at(
            Interval::TwoSided {
                half_width: self.delta,
            },
            s,
        )
    }
}

pub fn calibrate_two_sided(
    gamma: f64,
    delta: f64,
    batch: u32,
    horizon: u32,
    pseudo: f64,
) -> Result<EstimationPlan> {
    let shape = PlanShape::new(batch, horizon, pseudo)?;
    let cal = calibrate(Sidedness::TwoSided, delta, gamma, &shape)?;
    Ok(EstimationPlan {
        delta,
        gamma,
        lambda: cal.rule.lambda,
        shape,
        coverage: cal.coverage,
        attainable: cal.attainable,
        stops: cal.set,
    })
}

/// An estimation plan cut off after `n_max` comparisons for threshold `t`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedPlan<'a> {
    pub plan: &'a EstimationPlan,
    pub threshold: f64,
    pub n_max: u32,
}

/// `n_max` is the largest `n` over stopping points with `m/n ≥ t − δ`: a pair
/// still running past it can only stop below `t − δ`.
pub fn truncate_plan(plan: &EstimationPlan, t: f64) -> Result<TruncatedPlan<'_>> {
    let floor = t - plan.delta;
    let n_max = if floor <= 0.0 {
        plan.shape.horizon
    } else {
        plan.stops
            .points()
            .iter()
            .filter(|p| p.ratio() >= floor)
            .map(|p| p.n)
            .max()
            .ok_or_else(|| invalid(format!("no stopping point reaches t − δ = {floor}")))?
    };
    Ok(TruncatedPlan {
        plan,
        threshold: t,
        n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub s_hat: f64,
    pub half_width: f64,
    pub n_used: u32,
    pub accepted: bool,
    /// Cut off at `n_max` before the procedure stopped; `s_hat` is the
    /// estimate there.
    pub truncated: bool,
}

/// Runs the truncated procedure over batch match counts. A pair is accepted
/// iff `ŝ ≥ t − δ` where it stops or at `n_max`, whichever comes first.
pub fn estimate<I>(tp: &TruncatedPlan<'_>, stream: I) -> Result<SimEstimate>
where
    I: IntoIterator<Item = u32>,
{
    let plan = tp.plan;
    let batch = plan.shape.batch;
    let (mut m, mut n) = (0u32, 0u32);
    let mut stream = stream.into_iter();
    loop {
        let c = stream.next().ok_or(Error::SignatureExhausted(n))?;
        if c > batch {
            return Err(invalid(format!(
                "batch count {c} exceeds batch size {batch}"
            )));
        }
        m += c;
        n += batch;
        let s_hat = m as f64 / n as f64;
        if plan.is_stop(m, n) {
            return Ok(SimEstimate {
                s_hat,
                half_width: plan.delta,
                n_used: n,
                accepted: s_hat >= tp.threshold - plan.delta,
                truncated: false,
            });
        }
        if n >= tp.n_max {
            return Ok(SimEstimate {
                s_hat,
                half_width: plan.delta,
                n_used: n,
                accepted: s_hat >= tp.threshold - plan.delta,
                truncated: true,
            });
        }
    }
}
