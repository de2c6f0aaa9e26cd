//! Corpus files, synthetic data, the brute-force oracle and strategy
//! comparison.

pub mod compare;
pub mod io;
pub mod oracle;
pub mod sim;
pub mod synth;

pub use compare::{compare_strategies, evaluate, EvalReport, StrategyReport};
pub use io::{ingest, parse_corpus, write_corpus, write_pair_log, write_results, Corpus, Format};
pub use oracle::{oracle_allpairs, OraclePair};
pub use sim::{binomial_batches, monte_carlo_rate, three_sigma};
pub use synth::{spread_levels, synth, PlantedLevel, SynthSpec};
