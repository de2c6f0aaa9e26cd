//! Monte Carlo helpers: simulated hash-match streams and parallel rate
//! estimates with reproducible per-chunk seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

/// Endless batch match counts for a pair at collision probability `s`.
pub fn binomial_batches<R: Rng>(rng: &mut R, s: f64, batch: u32) -> impl Iterator<Item = u32> + '_ {
    let dist =
        Binomial::new(batch as u64, s.clamp(0.0, 1.0)).expect("probability clamped to [0, 1]");
    std::iter::repeat_with(move || dist.sample(rng) as u32)
}

const CHUNK: usize = 2048;

/// Fraction of `trials` for which `f` returns true. Trials run in parallel
/// chunks, each with its own generator derived from `seed`.
pub fn monte_carlo_rate<F>(trials: usize, seed: u64, f: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    if trials == 0 {
        return 0.0;
    }
    let hits: usize = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n).filter(|_| f(&mut rng)).count()
        })
        .sum();
    hits as f64 / trials as f64
}

/// Three binomial standard errors of a rate `p` over `trials`.
pub fn three_sigma(p: f64, trials: usize) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_have_the_right_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let total: u32 = binomial_batches(&mut rng, 0.7, 32).take(10_000).sum();
        let mean = total as f64 / (32.0 * 10_000.0);
        assert!((mean - 0.7).abs() < three_sigma(0.7, 320_000));
    }

    #[test]
    fn rates_are_reproducible() {
        let f = |r: &mut ChaCha8Rng| r.random_bool(0.25);
        let a = monte_carlo_rate(10_000, 7, f);
        assert_eq!(a, monte_carlo_rate(10_000, 7, f));
        assert!((a - 0.25).abs() < three_sigma(0.25, 10_000));
        assert_eq!(monte_carlo_rate(0, 7, f), 0.0);
    }
}
