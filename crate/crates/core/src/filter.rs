//! Randomized spectral filtering.
//!
//! Each round computes the mean and population covariance of the surviving
//! rows and the covariance's top eigenpair `(λ, v)`. Unless the stop rule
//! fires, one survivor is removed, drawn with probability proportional to its
//! score `τᵢ = (vᵀ(zᵢ − θ̂))²`. The estimate is the mean of the survivors.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, POWER_MAX_ITERS, POWER_TOL};
use crate::model::{MomentProfile, SampleSet};
use crate::netmax::NetDiagnostics;
use crate::numeric::{ceil_count, rng_from_seed, Confidence};

pub const DEFAULT_THRESHOLD_FACTOR: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StopMode {
    /// Stop once `λ < threshold_factor · cov_bound`.
    Threshold,
    /// Remove exactly `steps` points.
    FixedSteps { steps: usize },
    /// Threshold rule, but never more than `max_steps` removals.
    Capped { max_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Known upper bound on the good set's covariance operator norm.
    pub cov_bound: f64,
    #[serde(default = "default_threshold_factor")]
    pub threshold_factor: f64,
    pub stop_mode: StopMode,
    #[serde(default)]
    pub seed: u64,
}

fn default_threshold_factor() -> f64 {
    DEFAULT_THRESHOLD_FACTOR
}

impl FilterConfig {
    pub fn threshold(cov_bound: f64, seed: u64) -> Self {
        Self { cov_bound, threshold_factor: DEFAULT_THRESHOLD_FACTOR, stop_mode: StopMode::Threshold, seed }
    }

    pub fn fixed_steps(steps: usize, seed: u64) -> Self {
        Self {
            cov_bound: 0.0,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            stop_mode: StopMode::FixedSteps { steps },
            seed,
        }
    }

    pub fn capped(cov_bound: f64, max_steps: usize, seed: u64) -> Self {
        Self {
            cov_bound,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            stop_mode: StopMode::Capped { max_steps },
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cov_bound >= 0.0 && self.cov_bound.is_finite()) {
            return Err(Error::config(format!("cov_bound must be finite and ≥ 0, got {}", self.cov_bound)));
        }
        if !(self.threshold_factor > 0.0 && self.threshold_factor.is_finite()) {
            return Err(Error::config("threshold_factor must be positive"));
        }
        Ok(())
    }

    fn threshold_value(&self) -> f64 {
        self.threshold_factor * self.cov_bound
    }
}

/// Output of an estimator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate: Vec<f64>,
    /// Original row indices, in removal order.
    pub removed_indices: Vec<usize>,
    pub iterations: usize,
    pub final_top_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<NetDiagnostics>,
}

impl EstimateReport {
    pub fn plain(estimate: Vec<f64>) -> Self {
        Self { estimate, removed_indices: Vec::new(), iterations: 0, final_top_eigenvalue: 0.0, net: None }
    }
}

pub fn filter_multivariate(samples: &SampleSet, config: &FilterConfig) -> Result<EstimateReport> {
    config.validate()?;
    let p = samples.p();
    let data = samples.data();
    let mut survivors: Vec<usize> = (0..samples.n()).collect();
    let mut removed = Vec::new();
    let mut rng = rng_from_seed(config.seed);
    let mut direction: Option<Vec<f64>> = None;
    let mut scores = Vec::with_capacity(survivors.len());

    loop {
        if survivors.len() < 2 {
            return Err(Error::FilterExhausted { survivors: survivors.len(), iterations: removed.len() });
        }
        let mean = linalg::mean_of_rows(data, p, &survivors);
        let cov = linalg::covariance_of_rows(data, p, &survivors, &mean);
        let top = linalg::power_iteration(&cov, p, direction.as_deref(), &mut rng, POWER_TOL, POWER_MAX_ITERS);
        let lambda = top.value;

        let stop = match config.stop_mode {
            StopMode::Threshold => lambda < config.threshold_value(),
            StopMode::FixedSteps { steps } => removed.len() >= steps,
            StopMode::Capped { max_steps } => lambda < config.threshold_value() || removed.len() >= max_steps,
        };
        // Zero scatter leaves nothing to score.
        if stop || lambda == 0.0 {
            return Ok(EstimateReport {
                estimate: mean,
                iterations: removed.len(),
                removed_indices: removed,
                final_top_eigenvalue: lambda,
                net: None,
            });
        }

        scores.clear();
        scores.extend(survivors.iter().map(|&i| {
            let proj: f64 = data[i * p..(i + 1) * p]
                .iter()
                .zip(&mean)
                .zip(&top.vector)
                .map(|((x, m), v)| (x - m) * v)
                .sum();
            proj * proj
        }));
        let total: f64 = scores.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateScores);
        }
        let pick = sample_proportional(&scores, total, rng.random::<f64>());
        removed.push(survivors.remove(pick));
        direction = Some(top.vector);
    }
}

/// Index drawn with probability `weights[i] / total`, given `u ∈ [0, 1)`.
fn sample_proportional(weights: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if acc > target {
                return i;
            }
        }
    }
    last_positive
}

/// The filter on scalar data; λ is the sample variance.
pub fn filter_univariate(values: &[f64], config: &FilterConfig) -> Result<EstimateReport> {
    filter_multivariate(&SampleSet::from_column(values)?, config)
}

/// `⌈18·ln(1/δ) + 3·(n − n_good)⌉`, the high-probability bound on the number
/// of removals before the threshold rule fires.
pub fn stopping_cap(n: usize, n_good: usize, delta: f64) -> Result<usize> {
    if n_good > n {
        return Err(Error::config(format!("n_good ({n_good}) exceeds n ({n})")));
    }
    let conf = Confidence::from_delta(delta)?;
    Ok(ceil_count(18.0 * conf.log_inv() + 3.0 * (n - n_good) as f64) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HintSetting {
    HeavyTail,
    Huber,
}

/// Covariance bound to hand the threshold rule.
///
/// | setting | k | bound |
/// |---|---|---|
/// | heavy tail | 2 | `C‖Σ‖` |
/// | heavy tail | 1 | `C‖Σ‖ + tr Σ · ln(p/δ) / ln(1/δ)` |
/// | Huber | 1 | `C‖Σ‖ + tr Σ · ln(p/δ) / (nε + ln(1/δ))` |
/// | Huber | 2 | `C‖Σ‖ + tr Σ · ln(p/δ) / √(n²ε + n ln(1/δ))` |
pub fn cov_bound_hint(
    setting: HintSetting,
    moments: &MomentProfile,
    n: usize,
    p: usize,
    delta: f64,
    epsilon: f64,
    c: f64,
) -> Result<f64> {
    let conf = Confidence::from_delta(delta)?;
    if !(c > 0.0) {
        return Err(Error::config("constant C must be positive"));
    }
    if setting == HintSetting::Huber && !(0.0..0.5).contains(&epsilon) {
        return Err(Error::config(format!("epsilon must lie in [0, 0.5), got {epsilon}")));
    }
    if p == 0 || n == 0 {
        return Err(Error::config("n and p must be positive"));
    }
    let base = c * moments.opnorm_sigma;
    let spread = moments.trace_sigma * conf.log_scaled(p as f64);
    let (nf, l) = (n as f64, conf.log_inv());
    match (setting, moments.k) {
        (HintSetting::HeavyTail, 2) => Ok(base),
        (HintSetting::HeavyTail, 1) => Ok(base + spread / l),
        (HintSetting::Huber, 1) => Ok(base + spread / (nf * epsilon + l)),
        (HintSetting::Huber, 2) => Ok(base + spread / (nf * nf * epsilon + nf * l).sqrt()),
        (s, k) => Err(Error::config(format!("no covariance hint for {s:?} with k = {k}"))),
    }
}
