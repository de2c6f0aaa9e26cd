use std::collections::HashSet;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::candidates::{band_index, compute_l, exact_candidates, CandidatePair};
use crate::concentration::{
    calibrate_two_sided, estimate, truncate_plan, EstimationPlan, SimEstimate,
};
use crate::error::{invalid, Error, Result};
use crate::seqtest::{
    default_grid, load_or_build, sprt_boundaries, Outcome, PlanCache, PlanShape, PruneVerdict,
    Pruner, Route, SprtBoundaries, Strategy,
};
use crate::sketches::{HashFamily, Scheme, Signature};
use crate::vector::{Measure, SparseVector};

use super::config::{Mode, RunConfig};
use super::transforms::{native_to_cosine, solve_delta_s, transform_threshold};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    ExactComputed,
    SketchEstimated { n_used: u32 },
}

/// An emitted pair, `id_a < id_b`, with similarity on the user scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultPair {
    pub id_a: u64,
    pub id_b: u64,
    pub similarity: f64,
    pub provenance: Provenance,
}

/// Everything that happened to one candidate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairLog {
    pub id_a: u64,
    pub id_b: u64,
    pub verdict: PruneVerdict,
    pub estimate: Option<SimEstimate>,
    /// Exact similarity when computed.
    pub exact: Option<f64>,
    pub emitted: bool,
    /// Distinct hash positions compared for this pair.
    pub hash_comparisons: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub candidates: usize,
    pub pruned: usize,
    pub kept_for_exact: usize,
    pub truncated: usize,
    pub via_sprt: usize,
    pub via_ci: usize,
    pub exact_computed: usize,
    pub estimated: usize,
    pub emitted: usize,
    pub hash_comparisons: u64,
    pub signature_length: usize,
    pub wall: Duration,
}

impl RunReport {
    /// Recomputes every counter from a pair log.
    pub fn from_log(log: &[PairLog]) -> Self {
        let mut r = RunReport {
            candidates: log.len(),
            ..Self::default()
        };
        for p in log {
            match p.verdict.outcome {
                Outcome::Pruned => r.pruned += 1,
                Outcome::KeptForExact => r.kept_for_exact += 1,
                Outcome::Truncated => r.truncated += 1,
            }
            match p.verdict.route {
                Route::Sprt => r.via_sprt += 1,
                Route::OneSidedCi { .. } => r.via_ci += 1,
            }
            r.exact_computed += p.exact.is_some() as usize;
            r.estimated += p.estimate.is_some() as usize;
            r.emitted += p.emitted as usize;
            r.hash_comparisons += p.hash_comparisons as u64;
        }
        r
    }

    /// `(name, value)` pairs for machine-readable output.
    pub fn metrics(&self) -> Vec<(&'static str, String)> {
        vec![
            ("candidates", self.candidates.to_string()),
            ("pruned", self.pruned.to_string()),
            ("kept_for_exact", self.kept_for_exact.to_string()),
            ("truncated", self.truncated.to_string()),
            ("via_sprt", self.via_sprt.to_string()),
            ("via_ci", self.via_ci.to_string()),
            ("exact_computed", self.exact_computed.to_string()),
            ("estimated", self.estimated.to_string()),
            ("emitted", self.emitted.to_string()),
            ("hash_comparisons", self.hash_comparisons.to_string()),
            ("signature_length", self.signature_length.to_string()),
            ("wall_seconds", format!("{:.6}", self.wall.as_secs_f64())),
        ]
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "candidates        {}", self.candidates)?;
        writeln!(
            f,
            "pruned            {} (kept {}, truncated {})",
            self.pruned, self.kept_for_exact, self.truncated
        )?;
        writeln!(
            f,
            "routes            sprt {}, ci {}",
            self.via_sprt, self.via_ci
        )?;
        writeln!(f, "exact computed    {}", self.exact_computed)?;
        writeln!(f, "estimated         {}", self.estimated)?;
        writeln!(f, "emitted           {}", self.emitted)?;
        writeln!(f, "hash comparisons  {}", self.hash_comparisons)?;
        write!(f, "wall time         {:.3}s", self.wall.as_secs_f64())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: Vec<ResultPair>,
    pub report: RunReport,
    pub log: Vec<PairLog>,
}

/// Signatures, candidates and calibrated tests for one configuration, shared
/// by every strategy executed on it.
#[derive(Debug)]
pub struct Prepared<'c> {
    pub config: RunConfig,
    pub vectors: &'c [SparseVector],
    pub t_native: f64,
    pub family: HashFamily,
    pub signatures: Vec<Signature>,
    pub candidates: Vec<CandidatePair>,
    pub cache: PlanCache,
    pub sprt: SprtBoundaries,
    pub estimation: Option<EstimationPlan>,
    pub setup_time: Duration,
}

pub fn prepare<'c>(config: &RunConfig, vectors: &'c [SparseVector]) -> Result<Prepared<'c>> {
    let start = Instant::now();
    config.validate()?;
    let mut ids = HashSet::with_capacity(vectors.len());
    if let Some(dup) = vectors.iter().find(|v| !ids.insert(v.id())) {
        return Err(invalid(format!("duplicate vector id {}", dup.id())));
    }
    if config.measure == Measure::Jaccard && vectors.iter().any(|v| !v.is_set()) {
        return Err(invalid("Jaccard corpora must have unit weights"));
    }

    let t = config.threshold;
    let t_native = transform_threshold(t, config.measure)?;
    let shape = PlanShape::new(config.batch, config.horizon, config.pseudo)?;
    let grid = default_grid();
    let cache = match &config.plan_cache {
        Some(path) => load_or_build(path, config.alpha, shape, &grid)?,
        None => PlanCache::build(config.alpha, shape, &grid)?,
    };
    let sprt = sprt_boundaries(t_native, config.tau(), config.alpha, config.alpha)?;
    let scheme = Scheme::for_measure(config.measure);

    let (estimation, sig_len, band) = match config.mode {
        Mode::Exact => (None, config.horizon as usize, None),
        Mode::Sketch => {
            let delta = match config.measure {
                Measure::Jaccard => config.delta,
                Measure::Cosine => solve_delta_s(config.delta)?,
            };
            let plan = calibrate_two_sided(
                config.gamma(),
                delta,
                config.batch,
                config.est_horizon(),
                config.pseudo,
            )?;
            if !plan.attainable {
                return Err(Error::DegeneratePlan(format!(
                    "estimation horizon {} too short for δ = {delta}: coverage {:.4}",
                    config.est_horizon(),
                    plan.coverage
                )));
            }
            let n_max = truncate_plan(&plan, t_native)?.n_max as usize;
            let k = config.k();
            let l = match config.l {
                Some(l) => l,
                None => compute_l(t_native, k, config.phi)?,
            };
            let tests = n_max.max(config.horizon as usize);
            let (offset, len) = if config.fresh_hashes {
                (tests, tests + k * l)
            } else {
                (0, tests.max(k * l))
            };
            (Some(plan), len, Some((k, l, offset)))
        }
    };

    let family = HashFamily::new(scheme, config.seed, sig_len)?;
    let signatures = family.sign_all(vectors)?;
    let candidates = match band {
        None => exact_candidates(vectors, t, config.measure),
        Some((k, l, offset)) => band_index(&signatures, k, l, offset)?.pairs(),
    };
    Ok(Prepared {
        config: config.clone(),
        vectors,
        t_native,
        family,
        signatures,
        candidates,
        cache,
        sprt,
        estimation,
        setup_time: start.elapsed(),
    })
}

fn batches<'a>(a: &'a Signature, b: &'a Signature, batch: u32) -> impl Iterator<Item = u32> + 'a {
    let batch = batch as usize;
    (0..a.len() / batch).map(move |i| a.matches_unchecked(b, i * batch, (i + 1) * batch))
}

impl Prepared<'_> {
    pub fn pruner(&self, strategy: Strategy) -> Pruner<'_> {
        Pruner {
            strategy,
            cache: &self.cache,
            sprt: self.sprt,
            threshold: self.t_native,
            mu: self.config.mu,
            epsilon: self.config.epsilon,
        }
    }

    fn process(&self, pruner: &Pruner<'_>, pair: CandidatePair) -> Result<PairLog> {
        let (x, y) = (
            &self.vectors[pair.a as usize],
            &self.vectors[pair.b as usize],
        );
        let (sx, sy) = (
            &self.signatures[pair.a as usize],
            &self.signatures[pair.b as usize],
        );
        let (id_a, id_b) = if x.id() < y.id() {
            (x.id(), y.id())
        } else {
            (y.id(), x.id())
        };
        let batch = self.config.batch;
        let verdict = pruner.decide(batches(sx, sy, batch))?;
        let mut log = PairLog {
            id_a,
            id_b,
            verdict,
            estimate: None,
            exact: None,
            emitted: false,
            hash_comparisons: verdict.n_used,
        };
        if verdict.outcome == Outcome::Pruned {
            return Ok(log);
        }
        match &self.estimation {
            None => {
                let s = x.similarity(y, self.config.measure);
                log.exact = Some(s);
                log.emitted = s >= self.config.threshold;
            }
            Some(plan) => {
                let tp = truncate_plan(plan, self.t_native)?;
                let est = estimate(&tp, batches(sx, sy, batch))?;
                log.hash_comparisons = log.hash_comparisons.max(est.n_used);
                log.estimate = Some(est);
                log.emitted = est.accepted;
            }
        }
        Ok(log)
    }

    fn user_scale(&self, s_hat: f64) -> f64 {
        match self.config.measure {
            Measure::Jaccard => s_hat,
            Measure::Cosine => native_to_cosine(s_hat.clamp(0.5, 1.0)).unwrap_or(0.0),
        }
    }

    /// Runs one pruning strategy over the shared candidates.
    pub fn execute(&self, strategy: Strategy) -> Result<RunOutput> {
        let start = Instant::now();
        let pruner = self.pruner(strategy);
        let mut log = self
            .candidates
            .par_iter()
            .map(|&p| self.process(&pruner, p))
            .collect::<Result<Vec<_>>>()?;
        log.sort_unstable_by_key(|p| (p.id_a, p.id_b));
        let results = log
            .iter()
            .filter(|p| p.emitted)
            .map(|p| match (p.exact, p.estimate) {
                (Some(s), _) => ResultPair {
                    id_a: p.id_a,
                    id_b: p.id_b,
                    similarity: s,
                    provenance: Provenance::ExactComputed,
                },
                (None, Some(e)) => ResultPair {
                    id_a: p.id_a,
                    id_b: p.id_b,
                    similarity: self.user_scale(e.s_hat),
                    provenance: Provenance::SketchEstimated { n_used: e.n_used },
                },
                (None, None) => unreachable!("emitted pairs are always verified or estimated"),
            })
            .collect();
        let mut report = RunReport::from_log(&log);
        report.signature_length = self.family.h;
        report.wall = self.setup_time + start.elapsed();
        Ok(RunOutput {
            results,
            report,
            log,
        })
    }
}

/// Candidate generation, sequential pruning and verification or estimation
/// with the configured strategy.
pub fn run(config: &RunConfig, vectors: &[SparseVector]) -> Result<RunOutput> {
    prepare(config, vectors)?.execute(config.strategy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn duplicates() -> Vec<SparseVector> {
        let mut v = Vec::new();
        for i in 0..6u64 {
            v.push(SparseVector::from_set(i, vec![10, 20, 30, 40, i as u32 / 2 + 100]).unwrap());
        }
        v.push(SparseVector::from_set(99, vec![1, 2, 3]).unwrap());
        v
    }

    #[test]
    fn duplicated_vectors_come_back_with_similarity_one() {
        let v = duplicates();
        for mode in [Mode::Exact, Mode::Sketch] {
            let out = run(&RunConfig::new(Measure::Jaccard, mode, 0.9), &v).unwrap();
            let pairs: Vec<_> = out.results.iter().map(|r| (r.id_a, r.id_b)).collect();
            assert_eq!(pairs, vec![(0, 1), (2, 3), (4, 5)], "{mode}");
            assert!(out.results.iter().all(|r| r.similarity == 1.0));
        }
    }

    #[test]
    fn accounting_identity() {
        let v = duplicates();
        let out = run(&RunConfig::new(Measure::Jaccard, Mode::Exact, 0.5), &v).unwrap();
        let total: u64 = out.log.iter().map(|p| p.hash_comparisons as u64).sum();
        assert_eq!(out.report.hash_comparisons, total);
        assert_eq!(out.report.candidates, out.log.len());
        assert_eq!(out.report.emitted, out.results.len());
    }

    #[test]
    fn duplicate_ids_and_bad_weights_are_rejected() {
        let v = vec![
            SparseVector::from_set(1, vec![1]).unwrap(),
            SparseVector::from_set(1, vec![2]).unwrap(),
        ];
        assert!(run(&RunConfig::default(), &v).is_err());
        let w = vec![SparseVector::new(1, vec![(1, 0.5)]).unwrap()];
        assert!(run(&RunConfig::default(), &w).is_err());
    }

    #[test]
    fn fresh_hashes_extend_the_signature() {
        let v = duplicates();
        let mut c = RunConfig::new(Measure::Jaccard, Mode::Sketch, 0.9);
        let shared = prepare(&c, &v).unwrap().family.h;
        c.fresh_hashes = true;
        let fresh = prepare(&c, &v).unwrap().family.h;
        assert!(fresh > shared);
    }
}
