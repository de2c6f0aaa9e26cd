use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::seqtest::Strategy;
use crate::vector::Measure;

/// Exact verification of survivors, or sketch-only estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Sketch,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sketch => "sketch",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "sketch" | "approx" => Ok(Mode::Sketch),
            other => Err(invalid(format!("unknown mode `{other}`"))),
        }
    }
}

/// Run parameters. `None` fields take measure- or mode-dependent defaults;
/// use the accessor of the same name for the effective value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub measure: Measure,
    pub mode: Mode,
    /// Threshold on the user scale (Jaccard or cosine).
    pub threshold: f64,
    pub alpha: f64,
    pub tau: Option<f64>,
    pub epsilon: f64,
    pub mu: f64,
    pub delta: f64,
    pub gamma: Option<f64>,
    pub batch: u32,
    pub horizon: u32,
    pub est_horizon: Option<u32>,
    pub pseudo: f64,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub phi: f64,
    pub seed: u64,
    pub fresh_hashes: bool,
    pub strategy: Strategy,
    pub plan_cache: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            measure: Measure::Jaccard,
            mode: Mode::Exact,
            threshold: 0.7,
            alpha: 0.03,
            tau: None,
            epsilon: 0.01,
            mu: 0.18,
            delta: 0.05,
            gamma: None,
            batch: 32,
            horizon: 256,
            est_horizon: None,
            pseudo: 4.0,
            k: None,
            l: None,
            phi: 0.03,
            seed: 0x5eed,
            fresh_hashes: false,
            strategy: Strategy::Hybrid,
            plan_cache: None,
        }
    }
}

impl RunConfig {
    pub fn new(measure: Measure, mode: Mode, threshold: f64) -> Self {
        Self {
            measure,
            mode,
            threshold,
            ..Self::default()
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(match self.mode {
            Mode::Exact => 0.025,
            Mode::Sketch => 0.015,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(self.alpha)
    }

    /// Hash values per band.
    pub fn k(&self) -> usize {
        self.k.unwrap_or(match self.measure {
            Measure::Jaccard => 4,
            Measure::Cosine => 8,
        })
    }

    /// Horizon of the two-sided estimation procedure.
    pub fn est_horizon(&self) -> u32 {
        self.est_horizon.unwrap_or(match self.measure {
            Measure::Jaccard => 1024,
            Measure::Cosine => 2048,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(invalid(format!(
                "threshold {} must lie in (0, 1)",
                self.threshold
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma())] {
            if !(v > 0.0 && v < 0.5) {
                return Err(invalid(format!("{name} = {v} must lie in (0, 0.5)")));
            }
        }
        if self.tau().is_nan() || self.tau() <= 0.0 {
            return Err(invalid("tau must be positive"));
        }
        if !(self.epsilon >= 0.0 && self.mu > 0.0) {
            return Err(invalid("epsilon must be non-negative and mu positive"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(invalid(format!(
                "delta {} must lie in (0, 0.5)",
                self.delta
            )));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(invalid(format!("phi {} must lie in (0, 1)", self.phi)));
        }
        if self.batch == 0
            || !self.horizon.is_multiple_of(self.batch)
            || !self.est_horizon().is_multiple_of(self.batch)
        {
            return Err(invalid("batch must be positive and divide both horizons"));
        }
        if self.k() == 0 || self.l == Some(0) {
            return Err(invalid("k and l must be positive"));
        }
        Ok(())
    }

    /// Applies one `key = value` setting. Keys match the CLI flag names;
    /// `_` and `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| invalid(format!("bad value `{v}` for {key}")))
        }
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "measure" => self.measure = value.parse()?,
            "mode" => self.mode = value.parse()?,
            "threshold" | "t" => self.threshold = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "tau" => self.tau = Some(num(key, value)?),
            "epsilon" => self.epsilon = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "gamma" => self.gamma = Some(num(key, value)?),
            "batch" => self.batch = num(key, value)?,
            "horizon" => self.horizon = num(key, value)?,
            "est-horizon" => self.est_horizon = Some(num(key, value)?),
            "pseudo" => self.pseudo = num(key, value)?,
            "k" => self.k = Some(num(key, value)?),
            "l" => self.l = Some(num(key, value)?),
            "phi" => self.phi = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "fresh-hashes" => self.fresh_hashes = num(key, value)?,
            "strategy" => self.strategy = value.parse()?,
            "plan-cache" => self.plan_cache = Some(PathBuf::from(value)),
            other => return Err(invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| invalid(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(
            (c.alpha, c.epsilon, c.mu, c.delta),
            (0.03, 0.01, 0.18, 0.05)
        );
        assert_eq!((c.batch, c.horizon, c.pseudo), (32, 256, 4.0));
        assert_eq!(c.tau(), 0.025);
        assert_eq!(c.gamma(), 0.03);
        let s = RunConfig::new(Measure::Cosine, Mode::Sketch, 0.8);
        assert_eq!(s.tau(), 0.015);
        assert_eq!(s.k(), 8);
        c.validate().unwrap();
        s.validate().unwrap();
    }

    #[test]
    fn key_value_parsing() {
        let mut c = RunConfig::default();
        c.apply_kv("# comment\nmeasure = cosine\nmode=sketch\nthreshold = 0.9 # trailing\n\nfresh_hashes = true\n")
            .unwrap();
        assert_eq!(
            (c.measure, c.mode, c.threshold, c.fresh_hashes),
            (Measure::Cosine, Mode::Sketch, 0.9, true)
        );
        assert!(c.apply_kv("alpha 0.1").is_err());
        assert!(c.apply_kv("bogus = 1").is_err());
        assert!(c.apply_kv("alpha = x").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let c = RunConfig {
            batch: 30,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            threshold: 1.0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
