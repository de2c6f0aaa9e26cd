use rayon::prelude::*;

use crate::error::{invalid, Result};

use super::engine::{calibrate, PlanShape, Sidedness, StopPoint, StoppingSet};

/// A calibrated fixed-width one-sided sequential test.
///
/// Stopping at `(m, n)` reports the upper limit `min(m/n + width, 1)`, whose
/// exact coverage is at least `1 − alpha` for every true proportion when
/// `attainable` holds.
#[derive(Debug, Clone)]
pub struct StoppingPlan {
    pub width: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub shape: PlanShape,
    /// Exact `CP(lambda)`.
    pub coverage: f64,
    pub attainable: bool,
    stops: StoppingSet,
}

impl StoppingPlan {
    pub(crate) fn from_parts(
        width: f64,
        lambda: f64,
        alpha: f64,
        shape: PlanShape,
        coverage: f64,
        stops: StoppingSet,
    ) -> Self {
        Self {
            width,
            lambda,
            alpha,
            shape,
            coverage,
            attainable: coverage >= 1.0 - alpha,
            stops,
        }
    }

    pub fn points(&self) -> &[StopPoint] {
        self.stops.points()
    }

    pub fn stopping_set(&self) -> &StoppingSet {
        &self.stops
    }

    pub fn is_stop(&self, m: u32, n: u32) -> bool {
        self.stops.is_stop(m, n)
    }

    pub fn batch(&self) -> u32 {
        self.shape.batch
    }

    pub fn horizon(&self) -> u32 {
        self.shape.horizon
    }
}

/// Calibrates λ so the one-sided plan of width `w` has coverage ≥ `1 − alpha`.
///
/// When no λ in range reaches the target (horizon too short for `w`), the
/// plan at the smallest λ is returned with `attainable == false`.
pub fn calibrate_lambda(
    alpha: f64,
    w: f64,
    batch: u32,
    horizon: u32,
    pseudo: f64,
) -> Result<StoppingPlan> {
    let shape = PlanShape::new(batch, horizon, pseudo)?;
    calibrate_plan(alpha, w, &shape)
}

pub(crate) fn calibrate_plan(alpha: f64, w: f64, shape: &PlanShape) -> Result<StoppingPlan> {
    let cal = calibrate(Sidedness::Upper, w, alpha, shape)?;
    Ok(StoppingPlan::from_parts(
        w,
        cal.rule.lambda,
        alpha,
        *shape,
        cal.coverage,
        cal.set,
    ))
}

/// Default width grid: 0.05, 0.08, …, 0.65.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|k| (5 + 3 * k) as f64 / 100.0).collect()
}

const GRID_TOL: f64 = 1e-12;

/// Precomputed one-sided plans over a strictly increasing grid of widths.
#[derive(Debug, Clone)]
pub struct PlanCache {
    alpha: f64,
    shape: PlanShape,
    plans: Vec<StoppingPlan>,
}

impl PlanCache {
    /// Calibrates one plan per grid width; widths are synthesized in parallel.
    pub fn build(alpha: f64, shape: PlanShape, grid: &[f64]) -> Result<Self> {
        validate_grid(grid)?;
        let plans = grid
            .par_iter()
            .map(|&w| calibrate_plan(alpha, w, &shape))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alpha,
            shape,
            plans,
        })
    }

    pub(crate) fn from_plans(
        alpha: f64,
        shape: PlanShape,
        plans: Vec<StoppingPlan>,
    ) -> Result<Self> {
        validate_grid(&plans.iter().map(|p| p.width).collect::<Vec<_>>())?;
        Ok(Self {
            alpha,
            shape,
            plans,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn shape(&self) -> PlanShape {
        self.shape
    }

    pub fn plans(&self) -> &[StoppingPlan] {
        &self.plans
    }

    pub fn widths(&self) -> Vec<f64> {
        self.plans.iter().map(|p| p.width).collect()
    }

    /// The plan with the largest cached width ≤ `w`.
    pub fn lookup(&self, w: f64) -> Option<&StoppingPlan> {
        let idx = self.plans.partition_point(|p| p.width <= w + GRID_TOL);
        idx.checked_sub(1).map(|i| &self.plans[i])
    }

    /// Narrowest plan whose coverage target is met.
    pub fn smallest_attainable(&self) -> Option<&StoppingPlan> {
        self.plans.iter().find(|p| p.attainable)
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("width grid is empty"));
    }
    if grid.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(invalid("grid widths must be positive"));
    }
    if grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(invalid("grid widths must be strictly increasing"));
    }
    Ok(())
}
