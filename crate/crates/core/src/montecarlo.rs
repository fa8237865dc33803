//! Seeded Monte Carlo estimation of the average symbol error probability.
//!
//! Trial `t` of a run draws everything from substream `t` of the run seed,
//! so an estimate depends only on `(seed, number of trials)`: the chunk size
//! and the thread schedule only decide who computes which trial. Trials are
//! executed in rounds whose sizes double (starting at [`FIRST_ROUND`]);
//! the stopping rule is evaluated between rounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::SepQuery;
use crate::channel::{sample_noise, FadingSpec, StreamFactory};
use crate::curve::{Method, Resolution, SepCurve};
use crate::detector::{ml_detect_geometric, DetectionContext};
use crate::error::{Error, Result};
use crate::geometry::{ModulationSpec, QuantizerSpec};
use rand::Rng;

/// Trials in the first round of a run.
pub const FIRST_ROUND: u64 = 10_000;

/// One point of a Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimPlan {
    /// Any `n >= 1` is accepted, including the error-floor regime.
    pub query: SepQuery,
    pub max_trials: u64,
    /// Stop once `stderr / p_hat` falls to this value.
    pub target_rel_ci: f64,
    pub chunk_size: u64,
    pub seed: u64,
}

impl SimPlan {
    pub fn new(query: SepQuery, seed: u64) -> Self {
        Self {
            query,
            max_trials: 100_000_000,
            target_rel_ci: 0.02,
            chunk_size: 4096,
            seed,
        }
    }

    /// Exactly `trials` trials, no early stopping.
    pub fn fixed(query: SepQuery, trials: u64, seed: u64) -> Self {
        Self {
            max_trials: trials,
            target_rel_ci: f64::MIN_POSITIVE,
            chunk_size: trials.clamp(1, 4096),
            ..Self::new(query, seed)
        }
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::config("chunk_size must be at least 1"));
        }
        if self.max_trials < self.chunk_size {
            return Err(Error::config(format!(
                "max_trials = {} is below chunk_size = {}",
                self.max_trials, self.chunk_size
            )));
        }
        if !(self.target_rel_ci > 0.0) {
            return Err(Error::config("target_rel_ci must be positive"));
        }
        Ok(())
    }
}

/// Outcome of [`simulate_sep`]; `p_hat = errors / trials`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub errors: u64,
    pub seed: u64,
    pub chunks: u64,
}

impl SepEstimate {
    fn from_counts(errors: u64, trials: u64, seed: u64, chunks: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { errors as f64 / trials as f64 };
        let stderr = if trials == 0 {
            f64::INFINITY
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        Self {
            p_hat: p,
            stderr,
            trials,
            errors,
            seed,
            chunks,
        }
    }

    /// Relative standard error, infinite before the first error.
    pub fn rel_stderr(&self) -> f64 {
        if self.errors == 0 {
            f64::INFINITY
        } else {
            self.stderr / self.p_hat
        }
    }
}

/// Fixed pieces of one configuration shared by all trials.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub modulation: ModulationSpec,
    pub quantizer: QuantizerSpec,
    pub fading: FadingSpec,
    pub snr: f64,
}

impl TrialSetup {
    pub fn new(query: &SepQuery) -> Result<Self> {
        Ok(Self {
            modulation: ModulationSpec::new(query.order())?,
            quantizer: QuantizerSpec::new(query.bits())?,
            fading: FadingSpec::new(query.shape())?,
            snr: query.snr(),
        })
    }
}

/// One channel use: uniform symbol, fading, noise, quantization and ML
/// detection. Returns whether the decision was wrong.
pub fn run_trial<R: Rng + ?Sized>(setup: &TrialSetup, rng: &mut R) -> Result<bool> {
    let i = rng.random_range(0..setup.modulation.order());
    let h = setup.fading.sample(rng);
    let w = sample_noise(rng);
    let y = setup.snr.sqrt() * h * setup.modulation.symbol(i)? + w;
    let k = setup.quantizer.quantize(y)?;
    let ctx = DetectionContext::new(&setup.modulation, setup.quantizer, h, setup.snr)?;
    Ok(ml_detect_geometric(&ctx, k)? != i)
}

fn count_errors(setup: &TrialSetup, streams: &StreamFactory, start: u64, end: u64) -> Result<u64> {
    let mut errors = 0;
    for t in start..end {
        let mut rng = streams.stream(t);
        errors += run_trial(setup, &mut rng)? as u64;
    }
    Ok(errors)
}

/// Runs trials until the relative standard error reaches the target or the
/// trial budget is spent. The achieved precision is reported either way.
pub fn simulate_sep(plan: &SimPlan) -> Result<SepEstimate> {
    plan.validate()?;
    let setup = TrialSetup::new(&plan.query)?;
    let streams = StreamFactory::new(plan.seed);
    let (mut done, mut errors, mut chunks) = (0u64, 0u64, 0u64);
    let mut round = FIRST_ROUND.min(plan.max_trials);
    loop {
        let end = (done + round).min(plan.max_trials);
        let starts: Vec<u64> = (done..end).step_by(plan.chunk_size as usize).collect();
        let counts = starts
            .par_iter()
            .map(|&s| count_errors(&setup, &streams, s, (s + plan.chunk_size).min(end)))
            .collect::<Result<Vec<u64>>>()?;
        errors += counts.iter().sum::<u64>();
        chunks += counts.len() as u64;
        done = end;
        let est = SepEstimate::from_counts(errors, done, plan.seed, chunks);
        if done >= plan.max_trials || est.rel_stderr() <= plan.target_rel_ci {
            return Ok(est);
        }
        round = done;
    }
}

/// Simulates `template` at every SNR of the grid (in dB) with the template's
/// seed and budget.
pub fn sweep_sep(template: &SimPlan, snr_db: &[f64]) -> Result<(SepCurve, Vec<SepEstimate>)> {
    let q = template.query;
    let mut curve = SepCurve::new(q.order(), Resolution::Bits(q.bits()), q.shape(), Method::MonteCarlo);
    curve.seed = Some(template.seed);
    let mut estimates = Vec::with_capacity(snr_db.len());
    for &db in snr_db {
        let plan = SimPlan {
            query: SepQuery::from_db(q.order(), q.bits(), q.shape(), db)?,
            ..*template
        };
        let est = simulate_sep(&plan)?;
        curve.push(db, est.p_hat, est.stderr);
        estimates.push(est);
    }
    Ok((curve, estimates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_chunk_invariant() {
        let q = SepQuery::from_db(8, 3, 1.5, 12.0).unwrap();
        let a = simulate_sep(&SimPlan::fixed(q, 30_000, 5)).unwrap();
        let b = simulate_sep(&SimPlan::fixed(q, 30_000, 5)).unwrap();
        let c = simulate_sep(&SimPlan::fixed(q, 30_000, 5).with_chunk_size(777)).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.errors, a.trials), (c.errors, c.trials));
        assert_ne!(a.chunks, c.chunks);
    }

    #[test]
    fn stops_on_precision_target() {
        let q = SepQuery::new(4, 2, 1.0, 0.0).unwrap();
        let plan = SimPlan {
            target_rel_ci: 0.05,
            ..SimPlan::new(q, 1)
        };
        let est = simulate_sep(&plan).unwrap();
        assert_eq!(est.trials, FIRST_ROUND);
        assert!(est.rel_stderr() <= 0.05);
    }

    #[test]
    fn plan_validation() {
        let q = SepQuery::new(4, 2, 1.0, 1.0).unwrap();
        assert!(SimPlan::new(q, 0).with_chunk_size(0).validate().is_err());
        assert!(SimPlan::fixed(q, 10, 0).with_chunk_size(11).validate().is_err());
        let bad = SimPlan {
            target_rel_ci: 0.0,
            ..SimPlan::new(q, 0)
        };
        assert!(bad.validate().is_err());
    }
}
