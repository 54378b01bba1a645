//! Loss and quantile metrics, the sub-Gaussian benchmark and the sparse
//! operator norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::netmax::cover::binomial;
use crate::netmax::minimax::Combinations;
use crate::numeric::{floor_count, Confidence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub method: String,
    pub loss: f64,
    pub trial: usize,
}

/// `‖estimate − true_mean‖₂`
pub fn l2_loss(estimate: &[f64], true_mean: &[f64]) -> Result<f64> {
    if estimate.len() != true_mean.len() {
        return Err(Error::arg(format!(
            "dimension mismatch: estimate has {}, mean has {}",
            estimate.len(),
            true_mean.len()
        )));
    }
    Ok(linalg::distance(estimate, true_mean))
}

/// Empirical `Q_δ = inf{α : P(ℓ > α) ≤ δ}`: the order statistic `ℓ_(m)` with
/// `m = N − ⌊δN⌋`, the smallest index leaving at most `δN` losses above it.
pub fn quantile_error(losses: &[f64], delta: f64) -> Result<f64> {
    if losses.is_empty() {
        return Err(Error::arg("quantile of an empty loss list"));
    }
    Confidence::from_delta(delta).map_err(|_| Error::arg(format!("delta must lie in (0, 1), got {delta}")))?;
    let mut sorted = losses.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let above = (floor_count(delta * n as f64) as usize).min(n - 1);
    Ok(sorted[n - above - 1])
}

/// `√(tr Σ / n) + √(‖Σ‖₂ ln(1/δ) / n)`
pub fn opt_bound(n: usize, trace_sigma: f64, opnorm_sigma: f64, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    if !(trace_sigma >= 0.0 && opnorm_sigma >= 0.0) {
        return Err(Error::arg("covariance summaries must be non-negative"));
    }
    let conf = Confidence::from_delta(delta).map_err(|_| Error::arg(format!("delta must lie in (0, 1), got {delta}")))?;
    let n = n as f64;
    Ok((trace_sigma / n).sqrt() + (opnorm_sigma * conf.log_inv() / n).sqrt())
}

/// Largest supported number of principal submatrices.
pub const MAX_SPARSE_OPNORM_SUPPORTS: u128 = 10_000;

/// `sup { uᵀΣu : ‖u‖ = 1, ‖u‖₀ ≤ s2 }` by enumerating all size-`s2` principal
/// submatrices. `sigma` is row-major `p × p`.
pub fn sparse_opnorm(sigma: &[f64], p: usize, s2: usize) -> Result<f64> {
    if sigma.len() != p * p {
        return Err(Error::arg("sigma must be p × p"));
    }
    if s2 == 0 || s2 > p {
        return Err(Error::arg(format!("support size {s2} outside [1, {p}]")));
    }
    if binomial(p, s2) > MAX_SPARSE_OPNORM_SUPPORTS {
        return Err(Error::Refused(format!(
            "C({p}, {s2}) supports exceed the exhaustive limit of {MAX_SPARSE_OPNORM_SUPPORTS}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    let mut sub = vec![0.0; s2 * s2];
    for support in Combinations::new(p, s2) {
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                sub[a * s2 + b] = sigma[i * p + j];
            }
        }
        best = best.max(linalg::symmetric_max_eigenvalue(&sub, s2));
    }
    Ok(best)
}
