//! End-to-end runs: candidates, sequential pruning, then exact verification
//! or sketch-based estimation.

pub mod config;
pub mod run;
pub mod transforms;

pub use config::{Mode, RunConfig};
pub use run::{prepare, run, PairLog, Prepared, Provenance, ResultPair, RunOutput, RunReport};
pub use transforms::{cosine_to_native, native_to_cosine, solve_delta_s, transform_threshold};
