//! Sequential tests on streams of hash matches.

pub mod decide;
pub mod engine;
pub mod persist;
pub mod plan;
pub mod sprt;

pub use decide::{
    choose_width, ci_ht_decide, hybrid_decide, one_sided_decide, sprt_decide, Outcome,
    PruneVerdict, Pruner, Route, Strategy,
};
pub use engine::{
    calibrate, coverage, enumerate_stops, path_counts, path_counts_exact, wald_stop, Interval,
    PathCounts, PlanShape, Sidedness, StopPoint, StopRule, StoppingSet,
};
pub use persist::{load_or_build, read_plan_cache, write_plan_cache};
pub use plan::{calibrate_lambda, default_grid, PlanCache, StoppingPlan};
pub use sprt::{sprt_boundaries, sprt_step, SprtBoundaries, SprtDecision};
