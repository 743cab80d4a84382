//! Fairness metrics and the Monte Carlo comparison between picking the
//! candidate with the largest sum (SMax) and the one with the smallest sum of
//! inverses (SIMin).
//!
//! The experiment draws a finite set of random candidate vectors per trial and
//! lets each criterion select one of them; the reported number is the share of
//! trials in which the SIMin pick is at least as fair as the SMax pick.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

fn check_positive(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidParams("empty vector".into()));
    }
    match x.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        Some((index, &value)) => Err(Error::NonPositiveEntry { index, value }),
        None => Ok(()),
    }
}

/// Jain's index `(sum x)^2 / (n sum x^2)`, in `[1/n, 1]`.
pub fn jains_index(x: &[f64]) -> Result<f64> {
    check_positive(x)?;
    let s: f64 = x.iter().sum();
    let s2: f64 = x.iter().map(|v| v * v).sum();
    Ok(s * s / (x.len() as f64 * s2))
}

/// `max(x) / min(x)`, at least 1.
pub fn max_min_ratio(x: &[f64]) -> Result<f64> {
    check_positive(x)?;
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max / min)
}

/// A fairness measure where larger means fairer.
pub trait FairnessMetric: Sync {
    fn score(&self, x: &[f64]) -> Result<f64>;
}

/// Built-in metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Jain's index.
    Jain,
    /// `min/max`, the inverse of [`max_min_ratio`].
    MaxMinInverse,
}

impl FairnessMetric for Metric {
    fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Metric::Jain => jains_index(x),
            Metric::MaxMinInverse => max_min_ratio(x).map(|r| 1.0 / r),
        }
    }
}

/// Indices of the SMax pick (largest `sum x`) and the SIMin pick (smallest
/// `sum 1/x`). Ties go to the first candidate.
pub fn simin_smax_compare<V: AsRef<[f64]>>(candidates: &[V]) -> Result<(usize, usize)> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut smax = (0, f64::NEG_INFINITY);
    let mut simin = (0, f64::INFINITY);
    for (k, c) in candidates.iter().enumerate() {
        let c = c.as_ref();
        check_positive(c)?;
        let sum: f64 = c.iter().sum();
        let inv: f64 = c.iter().map(|v| 1.0 / v).sum();
        if sum > smax.1 {
            smax = (k, sum);
        }
        if inv < simin.1 {
            simin = (k, inv);
        }
    }
    Ok((smax.0, simin.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessTrialConfig {
    pub n_terms: usize,
    /// Entries are uniform on `[1, range_max]`.
    pub range_max: f64,
    pub n_candidates: usize,
    pub n_trials: usize,
    pub seed: u64,
}

impl Default for FairnessTrialConfig {
    fn default() -> Self {
        Self { n_terms: 2, range_max: 5.0, n_candidates: 64, n_trials: 10_000, seed: 0 }
    }
}

impl FairnessTrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_terms < 2
            || !(self.range_max > 1.0 && self.range_max.is_finite())
            || self.n_candidates == 0
            || self.n_trials == 0
        {
            return Err(Error::InvalidConfig(format!("fairness config out of range: {self:?}")));
        }
        Ok(())
    }

    /// Generator for one trial: stream `index` of the seeded ChaCha generator.
    pub fn trial_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Relative gap below which two scores count as tied.
pub const TIE_RTOL: f64 = 8.0 * f64::EPSILON;

/// Whether the SIMin pick of one trial scores at least as well as the SMax pick.
pub fn fairness_trial<M: FairnessMetric + ?Sized>(cfg: &FairnessTrialConfig, metric: &M, index: u64) -> Result<bool> {
    let mut rng = cfg.trial_rng(index);
    let candidates: Vec<Vec<f64>> = (0..cfg.n_candidates)
        .map(|_| (0..cfg.n_terms).map(|_| rng.random_range(1.0..=cfg.range_max)).collect())
        .collect();
    let (smax, simin) = simin_smax_compare(&candidates)?;
    let (a, b) = (metric.score(&candidates[simin])?, metric.score(&candidates[smax])?);
    Ok(a >= b - TIE_RTOL * b.abs())
}

/// Percentage of trials in which SIMin is at least as fair as SMax.
/// Trials run in parallel; the result depends only on the config.
pub fn fairness_experiment<M: FairnessMetric + ?Sized>(cfg: &FairnessTrialConfig, metric: &M) -> Result<f64> {
    cfg.validate()?;
    let wins = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|k| fairness_trial(cfg, metric, k).map(usize::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(100.0 * wins as f64 / cfg.n_trials as f64)
}
