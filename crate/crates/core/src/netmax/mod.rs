//! Direction-wise robust estimation aggregated by a minimax center.
//!
//! For every direction `u` of a half-cover, a univariate robust estimate of
//! `{uᵀxᵢ}` is computed at confidence `δ/5^p` (dense) or `δ/(6ep/s)^s`
//! (sparse). The estimate is the θ whose projections best match all of them
//! in the worst case.

pub mod cover;
mod lp;
pub mod minimax;

use serde::{Deserialize, Serialize};

pub use cover::{build_half_cover, CoverSet, COVER_RADIUS};
pub use minimax::{minimax_center, minimax_center_with, MinimaxSolution, SparseStrategy};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::filter::{filter_univariate, EstimateReport, FilterConfig, DEFAULT_THRESHOLD_FACTOR};
use crate::interval::{interval_estimate, IntervalConfig};
use crate::model::SampleSet;
use crate::numeric::{derive_seed, two_log_steps, Confidence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerEstimator {
    Interval1d,
    /// Univariate filter: threshold rule when `cov_bound` is given, otherwise
    /// `⌈2 ln(1/δ')⌉` fixed removals.
    Filter1d {
        #[serde(default)]
        cov_bound: Option<f64>,
        #[serde(default = "default_threshold_factor")]
        threshold_factor: f64,
    },
}

fn default_threshold_factor() -> f64 {
    DEFAULT_THRESHOLD_FACTOR
}

impl InnerEstimator {
    pub fn filter_fixed() -> Self {
        InnerEstimator::Filter1d { cov_bound: None, threshold_factor: DEFAULT_THRESHOLD_FACTOR }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub inner: InnerEstimator,
    /// Sparsity level `s` of the mean; directions are then 2s-sparse.
    pub sparsity: Option<usize>,
    /// Minimax tolerance; defaults to `1e-8 · max(1, max|target|)`.
    pub tol: Option<f64>,
    pub sparse_strategy: SparseStrategy,
    pub execution: Execution,
}

impl NetConfig {
    pub fn new(epsilon: f64, delta: f64, inner: InnerEstimator) -> Self {
        Self {
            epsilon,
            delta,
            inner,
            sparsity: None,
            tol: None,
            sparse_strategy: SparseStrategy::Auto,
            execution: Execution::default(),
        }
    }

    pub fn with_sparsity(mut self, s: usize) -> Self {
        self.sparsity = Some(s);
        self
    }

    /// Per-direction confidence `δ/5^p` or `δ/(6ep/s)^s`, in log space.
    pub fn direction_confidence(&self, p: usize) -> Result<Confidence> {
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::config(format!("epsilon must lie in [0, 0.5), got {}", self.epsilon)));
        }
        let conf = Confidence::from_delta(self.delta)?;
        match self.sparsity {
            None => {
                if p > cover::MAX_DENSE_DIM {
                    return Err(Error::config(format!(
                        "dense net estimation is limited to p ≤ {}; set a sparsity level",
                        cover::MAX_DENSE_DIM
                    )));
                }
                Ok(conf.split_log(p as f64 * 5f64.ln()))
            }
            Some(s) => {
                if s == 0 || 2 * s > p {
                    return Err(Error::config(format!("sparsity s = {s} must satisfy 1 ≤ s ≤ p/2")));
                }
                if cover::binomial(p, 2 * s) > cover::MAX_SPARSE_SUPPORTS {
                    return Err(Error::config(format!("C({p}, {}) sparse supports is too many", 2 * s)));
                }
                let (pf, sf) = (p as f64, s as f64);
                Ok(conf.split_log(sf * (6.0 * std::f64::consts::E * pf / sf).ln()))
            }
        }
    }
}

/// Extra output of [`net_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetDiagnostics {
    pub cover_size: usize,
    pub minimax_objective: f64,
    pub minimax_lower_bound: f64,
    /// Sparse support picked by hard thresholding instead of exhaustive search.
    pub sparse_heuristic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    /// Rows fed to the inner estimator (the interval estimator needs an even
    /// count, so a trailing odd row is dropped).
    pub rows_used: usize,
    /// `ln(1/δ')` used for each direction.
    pub direction_log_inv_delta: f64,
}

/// Builds a cover (seeded from `seed`) and runs [`net_estimate_with_cover`].
pub fn net_estimate(samples: &SampleSet, config: &NetConfig, seed: u64) -> Result<EstimateReport> {
    let p = samples.p();
    config.direction_confidence(p)?;
    let cover = build_half_cover(p, config.sparsity, derive_seed(seed, u64::MAX))?;
    net_estimate_with_cover(samples, config, &cover, seed)
}

pub fn net_estimate_with_cover(
    samples: &SampleSet,
    config: &NetConfig,
    cover: &CoverSet,
    seed: u64,
) -> Result<EstimateReport> {
    let p = samples.p();
    if cover.dim() != p {
        return Err(Error::config(format!("cover dimension {} does not match data dimension {p}", cover.dim())));
    }
    let conf = config.direction_confidence(p)?;
    let rows_used = match config.inner {
        InnerEstimator::Interval1d => samples.n() - samples.n() % 2,
        InnerEstimator::Filter1d { .. } => samples.n(),
    };

    let per_direction = |j: usize| -> Result<f64> {
        let mut values = samples.project(&cover.directions[j]);
        values.truncate(rows_used);
        match config.inner {
            InnerEstimator::Interval1d => {
                interval_estimate(&values, &IntervalConfig::with_confidence(config.epsilon, conf)?)
            }
            InnerEstimator::Filter1d { cov_bound, threshold_factor } => {
                let dir_seed = derive_seed(seed, j as u64);
                let cfg = match cov_bound {
                    Some(b) => FilterConfig { threshold_factor, ..FilterConfig::threshold(b, dir_seed) },
                    None => FilterConfig::fixed_steps(two_log_steps(conf), dir_seed),
                };
                Ok(filter_univariate(&values, &cfg)?.estimate[0])
            }
        }
    };
    let targets = map_indexed(cover.len(), config.execution, per_direction)
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    let tol = config.tol.unwrap_or_else(|| minimax::default_tol(&targets));
    let sol = minimax_center_with(&cover.directions, &targets, config.sparsity, tol, config.sparse_strategy)?;
    Ok(EstimateReport {
        estimate: sol.theta,
        removed_indices: Vec::new(),
        iterations: 0,
        final_top_eigenvalue: 0.0,
        net: Some(NetDiagnostics {
            cover_size: cover.len(),
            minimax_objective: sol.objective,
            minimax_lower_bound: sol.lower_bound,
            sparse_heuristic: sol.heuristic,
            support: sol.support,
            rows_used,
            direction_log_inv_delta: conf.log_inv(),
        }),
    })
}
