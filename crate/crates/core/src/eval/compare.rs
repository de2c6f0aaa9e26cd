use std::collections::HashMap;
use std::time::Duration;

use crate::error::Result;
use crate::pipeline::{prepare, RunConfig, RunOutput, RunReport};
use crate::seqtest::{Outcome, Strategy};
use crate::vector::{Measure, SparseVector};

use super::oracle::{oracle_allpairs, OraclePair};

/// Quality and cost of one strategy against the brute-force oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub recall: f64,
    pub precision: f64,
    /// Over emitted pairs, on the user scale.
    pub mean_error: f64,
    pub max_error: f64,
    /// Fraction of true pairs among the candidates that the test pruned.
    pub type_one: f64,
    pub true_positives: usize,
    pub hash_comparisons: u64,
    pub runtime: Duration,
    pub run: RunReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub oracle_pairs: usize,
    /// True pairs that reached the sequential test.
    pub candidate_true_pairs: usize,
    pub strategies: Vec<StrategyReport>,
}

impl EvalReport {
    pub fn metrics(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("oracle_pairs".to_string(), self.oracle_pairs.to_string()),
            (
                "candidate_true_pairs".to_string(),
                self.candidate_true_pairs.to_string(),
            ),
        ];
        for s in &self.strategies {
            let p = s.strategy.as_str();
            out.push((format!("{p}.recall"), format!("{:.6}", s.recall)));
            out.push((format!("{p}.precision"), format!("{:.6}", s.precision)));
            out.push((format!("{p}.mean_error"), format!("{:.6}", s.mean_error)));
            out.push((format!("{p}.max_error"), format!("{:.6}", s.max_error)));
            out.push((format!("{p}.type_one"), format!("{:.6}", s.type_one)));
            out.push((
                format!("{p}.hash_comparisons"),
                s.hash_comparisons.to_string(),
            ));
            out.push((
                format!("{p}.runtime_seconds"),
                format!("{:.6}", s.runtime.as_secs_f64()),
            ));
        }
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores one run against the oracle pairs for the same threshold.
pub fn evaluate(
    output: &RunOutput,
    strategy: Strategy,
    oracle: &[OraclePair],
    vectors: &[SparseVector],
    measure: Measure,
) -> StrategyReport {
    let truth: HashMap<(u64, u64), f64> = oracle
        .iter()
        .map(|p| ((p.id_a, p.id_b), p.similarity))
        .collect();
    let by_id: HashMap<u64, &SparseVector> = vectors.iter().map(|v| (v.id(), v)).collect();

    let true_positives = output
        .results
        .iter()
        .filter(|r| truth.contains_key(&(r.id_a, r.id_b)))
        .count();
    let errors: Vec<f64> = output
        .results
        .iter()
        .map(|r| {
            let exact = truth
                .get(&(r.id_a, r.id_b))
                .copied()
                .unwrap_or_else(|| by_id[&r.id_a].similarity(by_id[&r.id_b], measure));
            (r.similarity - exact).abs()
        })
        .collect();
    let tested_true: Vec<_> = output
        .log
        .iter()
        .filter(|p| truth.contains_key(&(p.id_a, p.id_b)))
        .collect();
    let pruned_true = tested_true
        .iter()
        .filter(|p| p.verdict.outcome == Outcome::Pruned)
        .count();

    StrategyReport {
        strategy,
        recall: ratio(true_positives, oracle.len()),
        precision: ratio(true_positives, output.results.len()),
        mean_error: if errors.is_empty() {
            0.0
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        },
        max_error: errors.iter().copied().fold(0.0, f64::max),
        type_one: if tested_true.is_empty() {
            0.0
        } else {
            pruned_true as f64 / tested_true.len() as f64
        },
        true_positives,
        hash_comparisons: output.report.hash_comparisons,
        runtime: output.report.wall,
        run: output.report.clone(),
    }
}

/// Runs each strategy on the same signatures and candidates and scores them.
pub fn compare_strategies(
    config: &RunConfig,
    vectors: &[SparseVector],
    strategies: &[Strategy],
) -> Result<EvalReport> {
    let prepared = prepare(config, vectors)?;
    let oracle = oracle_allpairs(vectors, config.threshold, config.measure);
    let mut reports = Vec::with_capacity(strategies.len());
    let mut candidate_true_pairs = 0;
    for &s in strategies {
        let out = prepared.execute(s)?;
        let rep = evaluate(&out, s, &oracle, vectors, config.measure);
        candidate_true_pairs = out
            .log
            .iter()
            .filter(|p| {
                oracle
                    .binary_search_by_key(&(p.id_a, p.id_b), |o| (o.id_a, o.id_b))
                    .is_ok()
            })
            .count();
        reports.push(rep);
    }
    Ok(EvalReport {
        oracle_pairs: oracle.len(),
        candidate_true_pairs,
        strategies: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Mode;

    #[test]
    fn empty_candidates_give_zero_counters() {
        let v = vec![
            SparseVector::from_set(1, vec![1, 2, 3]).unwrap(),
            SparseVector::from_set(2, vec![4, 5, 6]).unwrap(),
        ];
        let cfg = RunConfig::new(Measure::Jaccard, Mode::Exact, 0.5);
        let r = compare_strategies(&cfg, &v, &Strategy::ALL).unwrap();
        assert_eq!(r.oracle_pairs, 0);
        for s in &r.strategies {
            assert_eq!(s.hash_comparisons, 0);
            assert_eq!(s.run.candidates, 0);
            assert_eq!(s.true_positives, 0);
        }
    }
}
