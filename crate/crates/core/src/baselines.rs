//! Baseline and reference estimators: sample mean, geometric
//! median-of-means, coordinate-wise filtering, the ℓ₂-oracle truncated mean,
//! and exhaustive subset search with its population bias.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{filter_univariate, FilterConfig};
use crate::linalg;
use crate::model::{MomentProfile, SampleSet};
use crate::netmax::cover::binomial;
use crate::netmax::minimax::Combinations;
use crate::numeric::{derive_seed, floor_count, rng_from_seed, two_log_steps, Confidence};

pub const WEISZFELD_MAX_ITERS: usize = 10_000;
/// Distance under which a Weiszfeld iterate is treated as sitting on a point.
pub const ANCHOR_EPS: f64 = 1e-12;
/// Largest `n` accepted by [`srm_bruteforce`].
pub const SRM_MAX_N: usize = 25;

pub fn sample_mean(samples: &SampleSet) -> Vec<f64> {
    let rows: Vec<usize> = (0..samples.n()).collect();
    linalg::mean_of_rows(samples.data(), samples.p(), &rows)
}

/// Contiguous block boundaries: `blocks` groups of near-equal size, the
/// first `n mod blocks` groups one row longer.
pub fn block_ranges(n: usize, blocks: usize) -> Vec<std::ops::Range<usize>> {
    let (base, extra) = (n / blocks, n % blocks);
    let mut start = 0;
    (0..blocks)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMedian {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// `Σᵢ‖θ − xᵢ‖` at the start and after every iteration.
    pub objective_trace: Vec<f64>,
}

fn sum_of_distances(points: &[Vec<f64>], y: &[f64]) -> f64 {
    points.iter().map(|x| linalg::distance(x, y)).sum()
}

/// Geometric median by Weiszfeld iteration with the Vardi–Zhang modification
/// at data points, started from the centroid. Stops when a step moves less
/// than `tol · max(1, ‖θ‖)`.
pub fn geometric_median(points: &[Vec<f64>], tol: f64) -> Result<GeometricMedian> {
    if points.is_empty() {
        return Err(Error::arg("geometric median of no points"));
    }
    if !(tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    let p = points[0].len();
    let mut y = vec![0.0; p];
    for x in points {
        y.iter_mut().zip(x).for_each(|(a, b)| *a += b);
    }
    y.iter_mut().for_each(|a| *a /= points.len() as f64);
    let mut trace = vec![sum_of_distances(points, &y)];

    for it in 1..=WEISZFELD_MAX_ITERS {
        let mut num = vec![0.0; p];
        let mut denom = 0.0;
        let mut coincident = 0usize;
        for x in points {
            let d = linalg::distance(x, &y);
            if d <= ANCHOR_EPS {
                coincident += 1;
                continue;
            }
            num.iter_mut().zip(x).for_each(|(a, b)| *a += b / d);
            denom += 1.0 / d;
        }
        if denom == 0.0 {
            // Every point coincides with the iterate.
            trace.push(sum_of_distances(points, &y));
            return Ok(GeometricMedian { point: y, iterations: it, objective_trace: trace });
        }
        let weiszfeld: Vec<f64> = num.iter().map(|a| a / denom).collect();
        let next = if coincident == 0 {
            weiszfeld
        } else {
            // Pull R̃ = Σ_{xᵢ ≠ y} (xᵢ − y)/‖xᵢ − y‖ against the coincident mass η.
            let r_norm = linalg::norm(
                &weiszfeld.iter().zip(&y).map(|(t, yi)| (t - yi) * denom).collect::<Vec<_>>(),
            );
            let eta = coincident as f64;
            if r_norm <= eta {
                trace.push(sum_of_distances(points, &y));
                return Ok(GeometricMedian { point: y, iterations: it, objective_trace: trace });
            }
            let w = 1.0 - eta / r_norm;
            weiszfeld.iter().zip(&y).map(|(t, yi)| w * t + (1.0 - w) * yi).collect()
        };
        let step = linalg::distance(&next, &y);
        y = next;
        trace.push(sum_of_distances(points, &y));
        if step <= tol * linalg::norm(&y).max(1.0) {
            return Ok(GeometricMedian { point: y, iterations: it, objective_trace: trace });
        }
    }
    Err(Error::Convergence { iterations: WEISZFELD_MAX_ITERS, last: y })
}

pub fn block_means(samples: &SampleSet, blocks: usize) -> Result<Vec<Vec<f64>>> {
    if blocks == 0 || blocks > samples.n() {
        return Err(Error::arg(format!("block count {blocks} outside [1, {}]", samples.n())));
    }
    Ok(block_ranges(samples.n(), blocks)
        .into_iter()
        .map(|r| linalg::mean_of_rows(samples.data(), samples.p(), &r.collect::<Vec<_>>()))
        .collect())
}

/// Geometric median of contiguous block means.
pub fn geometric_median_of_means(samples: &SampleSet, blocks: usize, tol: f64) -> Result<Vec<f64>> {
    let means = block_means(samples, blocks)?;
    if blocks == 1 {
        return Ok(means.into_iter().next().expect("one block"));
    }
    Ok(geometric_median(&means, tol)?.point)
}

/// `⌈3.5·ln(1/δ)⌉`, the block count with the textbook guarantee.
pub fn gmom_theory_blocks(delta: f64) -> Result<usize> {
    Ok(crate::numeric::ceil_count(3.5 * Confidence::from_delta(delta)?.log_inv()) as usize)
}

/// `⌈2·ln(1/δ)⌉`, the block count used in the benchmark.
pub fn gmom_bench_blocks(delta: f64) -> Result<usize> {
    Ok(two_log_steps(Confidence::from_delta(delta)?))
}

/// Univariate filter on every coordinate, `⌈2 ln(1/δ)⌉` removals each, with
/// independent seeds.
pub fn coordinatewise_filter(samples: &SampleSet, delta: f64, seed: u64) -> Result<Vec<f64>> {
    let steps = two_log_steps(Confidence::from_delta(delta)?);
    (0..samples.p())
        .map(|j| {
            let cfg = FilterConfig::fixed_steps(steps, derive_seed(seed, j as u64));
            Ok(filter_univariate(&samples.column(j), &cfg)?.estimate[0])
        })
        .collect()
}

/// Radius schedules for the oracle estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRule {
    pub k: u8,
    pub trace_sigma: f64,
    pub opnorm_sigma: f64,
    pub n: usize,
    pub delta: f64,
    /// 0 for the heavy-tailed model.
    #[serde(default)]
    pub epsilon: f64,
}

impl RadiusRule {
    pub fn from_moments(m: &MomentProfile, n: usize, delta: f64, epsilon: f64) -> Self {
        Self { k: m.k, trace_sigma: m.trace_sigma, opnorm_sigma: m.opnorm_sigma, n, delta, epsilon }
    }

    /// Heavy tails (ε = 0), with `a = ln(1/δ)/n` and `r = tr Σ/‖Σ‖`:
    /// `k = 2: √trΣ / (r^{1/8} a^{1/4})`, `k = 1: √trΣ / (r^{1/4} a^{1/2})`.
    /// Huber (ε > 0): `√trΣ / (ε + a)^{1/2}` for k = 1 and `^{1/4}` for k = 2.
    pub fn radius(&self) -> Result<f64> {
        let m = MomentProfile::new(self.k, self.trace_sigma, self.opnorm_sigma)?;
        if self.n == 0 {
            return Err(Error::config("n must be positive"));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::config("epsilon must lie in [0, 0.5)"));
        }
        let a = Confidence::from_delta(self.delta)?.log_inv() / self.n as f64;
        let root_trace = self.trace_sigma.sqrt();
        let r = m.effective_rank();
        let radius = if self.epsilon == 0.0 {
            match self.k {
                2 => root_trace / (r.powf(0.125) * a.powf(0.25)),
                _ => root_trace / (r.powf(0.25) * a.sqrt()),
            }
        } else {
            let e = self.epsilon + a;
            match self.k {
                2 => root_trace / e.powf(0.25),
                _ => root_trace / e.sqrt(),
            }
        };
        if !(radius > 0.0) {
            return Err(Error::config("radius rule produced a non-positive radius"));
        }
        Ok(radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Literal(f64),
    Rule(RadiusRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub true_mean: Vec<f64>,
    pub radius: Radius,
}

impl OracleConfig {
    pub fn resolve_radius(&self) -> Result<f64> {
        match self.radius {
            Radius::Literal(r) if r > 0.0 => Ok(r),
            Radius::Literal(r) => Err(Error::config(format!("oracle radius must be positive, got {r}"))),
            Radius::Rule(rule) => rule.radius(),
        }
    }

    fn survivors(&self, samples: &SampleSet) -> Result<(Vec<usize>, f64)> {
        if self.true_mean.len() != samples.p() {
            return Err(Error::config("true_mean dimension does not match the samples"));
        }
        let radius = self.resolve_radius()?;
        let kept: Vec<usize> = (0..samples.n())
            .filter(|&i| linalg::distance(samples.row(i), &self.true_mean) <= radius)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyOracle { radius });
        }
        Ok((kept, radius))
    }
}

/// Mean of the rows within the closed ball of the configured radius around
/// the true mean.
pub fn oracle_truncated_mean(samples: &SampleSet, config: &OracleConfig) -> Result<Vec<f64>> {
    let (kept, _) = config.survivors(samples)?;
    Ok(linalg::mean_of_rows(samples.data(), samples.p(), &kept))
}

/// Top eigenvalue of the oracle survivors' sample covariance.
pub fn oracle_survivor_covariance(samples: &SampleSet, config: &OracleConfig) -> Result<f64> {
    let (kept, _) = config.survivors(samples)?;
    let p = samples.p();
    let mean = linalg::mean_of_rows(samples.data(), p, &kept);
    let cov = linalg::covariance_of_rows(samples.data(), p, &kept, &mean);
    Ok(linalg::top_eigen(&cov, p, 0).value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFit {
    pub estimate: Vec<f64>,
    /// Row indices of the winning subset, ascending.
    pub subset: Vec<usize>,
    /// `Σ_{i∈S} ‖xᵢ − mean(S)‖² / |S|`
    pub loss: f64,
}

/// Exhaustive subset search: the mean of the size-`⌊(1−ε)n⌋` subset with the
/// smallest normalized within-subset scatter. Ties go to the
/// lexicographically smallest index set.
pub fn srm_bruteforce(samples: &SampleSet, epsilon: f64) -> Result<SubsetFit> {
    let n = samples.n();
    if n > SRM_MAX_N {
        return Err(Error::Refused(format!(
            "exhaustive subset search is limited to n ≤ {SRM_MAX_N} (got {n}); use a sampled search instead"
        )));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::config("epsilon must lie in [0, 1)"));
    }
    let k = floor_count((1.0 - epsilon) * n as f64) as usize;
    if k == 0 {
        return Err(Error::config("⌊(1−ε)n⌋ must be at least 1"));
    }
    debug_assert!(binomial(n, k) > 0);
    let p = samples.p();
    let mut best: Option<SubsetFit> = None;
    for subset in Combinations::new(n, k) {
        let mean = linalg::mean_of_rows(samples.data(), p, &subset);
        let loss = subset
            .iter()
            .map(|&i| {
                let d = linalg::distance(samples.row(i), &mean);
                d * d
            })
            .sum::<f64>()
            / k as f64;
        if best.as_ref().is_none_or(|b| loss < b.loss) {
            best = Some(SubsetFit { estimate: mean, subset, loss });
        }
    }
    Ok(best.expect("at least one subset"))
}

/// `ε / √((1−ε)(1−2ε)) · √tr Σ`, the worst-case population bias of subset
/// search.
pub fn srm_population_bias(epsilon: f64, trace_sigma: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::arg(format!("epsilon must lie in [0, 1/2), got {epsilon}")));
    }
    Ok(epsilon / ((1.0 - epsilon) * (1.0 - 2.0 * epsilon)).sqrt() * trace_sigma.sqrt())
}

/// Population risk of the best fit to the mixture `(1−η)P + ηQ`:
/// `(1−η) tr Σ_P + η tr Σ_Q + η(1−η) ‖μ_P − μ_Q‖²`.
pub fn srm_mixture_risk(eta: f64, trace_p: f64, trace_q: f64, mean_gap_sq: f64) -> f64 {
    (1.0 - eta) * trace_p + eta * trace_q + eta * (1.0 - eta) * mean_gap_sq
}

/// Whether the population subset search keeps the contaminated mass:
/// `‖μ_P − μ_Q‖² ≤ ((1−ε)/(1−2ε)) (tr Σ_P − tr Σ_Q)`.
pub fn srm_keeps_contamination(epsilon: f64, trace_p: f64, trace_q: f64, mean_gap_sq: f64) -> bool {
    mean_gap_sq <= (1.0 - epsilon) / (1.0 - 2.0 * epsilon) * (trace_p - trace_q)
}

/// Distance `√((1−ε)/(1−2ε) · (tr Σ_P − tr Σ_Q))` at which the decision flips.
pub fn srm_threshold_distance(epsilon: f64, trace_p: f64, trace_q: f64) -> f64 {
    ((1.0 - epsilon) / (1.0 - 2.0 * epsilon) * (trace_p - trace_q)).max(0.0).sqrt()
}

/// Population bias against a point mass at distance `d`:
/// `(ε/(1−ε))·d` when the contamination is kept, 0 otherwise.
pub fn srm_bias_at_distance(epsilon: f64, trace_p: f64, d: f64) -> f64 {
    if srm_keeps_contamination(epsilon, trace_p, 0.0, d * d) {
        epsilon / (1.0 - epsilon) * d
    } else {
        0.0
    }
}

/// Monte-Carlo `(E[x | A], Var(x | A))` for `x ~ N(0, 1)` and the one-sided
/// event `A = {x ≤ q_{1−ε}}`, with the quantile taken empirically: `A` keeps
/// the `⌈(1−ε)·draws⌉` smallest draws.
pub fn one_sided_conditional_moments(epsilon: f64, draws: usize, seed: u64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::arg(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    if draws < 2 {
        return Err(Error::arg("need at least two draws"));
    }
    let mut rng = rng_from_seed(seed);
    let mut xs: Vec<f64> = (0..draws).map(|_| rng.sample(StandardNormal)).collect();
    let keep = (crate::numeric::ceil_count((1.0 - epsilon) * draws as f64) as usize).clamp(2, draws);
    xs.select_nth_unstable_by(keep - 1, f64::total_cmp);
    let kept = &xs[..keep];
    let mean = kept.iter().sum::<f64>() / keep as f64;
    let var = kept.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / keep as f64;
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_dataset, DistributionSpec};
    use proptest::prelude::*;

    #[test]
    fn mean_examples() {
        let s = SampleSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(sample_mean(&s), vec![1.0, 2.0]);
        let same = SampleSet::from_rows(&vec![vec![3.0, -1.0]; 4]).unwrap();
        assert_eq!(sample_mean(&same), vec![3.0, -1.0]);
    }

    #[test]
    fn blocks() {
        let r = block_ranges(10, 3);
        assert_eq!(r, vec![0..4, 4..7, 7..10]);
        assert_eq!(block_ranges(6, 6).len(), 6);
        assert_eq!(gmom_theory_blocks(0.05).unwrap(), 11);
        assert_eq!(gmom_bench_blocks(0.05).unwrap(), 6);
    }

    #[test]
    fn gmom_single_block_is_mean() {
        let s = sample_dataset(&DistributionSpec::lognormal(3), 50, 1).unwrap();
        assert_eq!(geometric_median_of_means(&s, 1, 1e-10).unwrap(), sample_mean(&s));
        assert!(geometric_median_of_means(&s, 0, 1e-10).is_err());
        assert!(geometric_median_of_means(&s, 51, 1e-10).is_err());
    }

    #[test]
    fn one_dimensional_median() {
        let pts = vec![vec![1.0], vec![2.0], vec![100.0]];
        let gm = geometric_median(&pts, 1e-12).unwrap();
        assert!((gm.point[0] - 2.0).abs() < 1e-8, "{:?}", gm.point);
        // Through block means: blocks {1}, {2}, {100}.
        let s = SampleSet::from_column(&[1.0, 2.0, 100.0]).unwrap();
        assert!((geometric_median_of_means(&s, 3, 1e-12).unwrap()[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn weiszfeld_objective_is_monotone() {
        for seed in 0..20 {
            let s = sample_dataset(&DistributionSpec::pareto(4, 2.5), 60, seed).unwrap();
            let means = block_means(&s, 7).unwrap();
            let gm = geometric_median(&means, 1e-12).unwrap();
            for w in gm.objective_trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} > {}", w[1], w[0]);
            }
        }
    }

    #[test]
    fn iterate_on_a_data_point() {
        // Centroid equals a data point that is also the median.
        let pts = vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let gm = geometric_median(&pts, 1e-12).unwrap();
        assert_eq!(gm.point, vec![0.0, 0.0]);
        // Centroid on a point that is not the median: must move off it.
        let pts = vec![vec![0.0], vec![0.0], vec![-3.0], vec![1.0], vec![2.0]];
        let gm = geometric_median(&pts, 1e-13).unwrap();
        assert!(gm.point[0].abs() < 1e-8);
        let pts = vec![vec![1.0], vec![1.0], vec![1.0], vec![5.0], vec![-3.0], vec![6.0], vec![7.0]];
        let gm = geometric_median(&pts, 1e-13).unwrap();
        assert!((gm.point[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coordinatewise_examples() {
        let same = SampleSet::from_rows(&vec![vec![1.0, 2.0]; 30]).unwrap();
        assert_eq!(coordinatewise_filter(&same, 0.05, 0).unwrap(), vec![1.0, 2.0]);

        let mut rows: Vec<Vec<f64>> = (0..99).map(|i| vec![0.0, (i % 3) as f64]).collect();
        rows.push(vec![1e4, 1.0]);
        let s = SampleSet::from_rows(&rows).unwrap();
        let est = coordinatewise_filter(&s, 0.05, 3).unwrap();
        assert!(est[0].abs() < 1e-9);
        // Coordinate 2 has no outlier; six removals move it only slightly.
        assert!((est[1] - 0.99).abs() < 0.1);
    }

    #[test]
    fn oracle_examples() {
        let s = SampleSet::from_column(&[-1.0, 0.0, 1.0, 10.0]).unwrap();
        let cfg = OracleConfig { true_mean: vec![0.0], radius: Radius::Literal(2.0) };
        assert_eq!(oracle_truncated_mean(&s, &cfg).unwrap(), vec![0.0]);
        let all = OracleConfig { true_mean: vec![0.0], radius: Radius::Literal(f64::INFINITY) };
        assert_eq!(oracle_truncated_mean(&s, &all).unwrap(), sample_mean(&s));
        let none = OracleConfig { true_mean: vec![100.0], radius: Radius::Literal(1.0) };
        assert!(matches!(oracle_truncated_mean(&s, &none), Err(Error::EmptyOracle { .. })));

        let pair = SampleSet::from_column(&[-1.0, 1.0, 50.0]).unwrap();
        let cfg = OracleConfig { true_mean: vec![0.0], radius: Radius::Literal(1.0) };
        assert!((oracle_survivor_covariance(&pair, &cfg).unwrap() - 1.0).abs() < 1e-12);
        let same = SampleSet::from_column(&[4.0; 3]).unwrap();
        let cfg = OracleConfig { true_mean: vec![4.0], radius: Radius::Literal(1.0) };
        assert_eq!(oracle_survivor_covariance(&same, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn radius_rules() {
        let rule = RadiusRule { k: 2, trace_sigma: 20.0, opnorm_sigma: 1.0, n: 500, delta: 0.05, epsilon: 0.0 };
        let a = 20f64.ln() / 500.0;
        let expected = 20f64.sqrt() / (20f64.sqrt().powf(0.25) * a.powf(0.25));
        assert!((rule.radius().unwrap() - expected).abs() < 1e-12);
        let k1 = RadiusRule { k: 1, ..rule };
        assert!((k1.radius().unwrap() - 20f64.sqrt() / (20f64.powf(0.25) * a.sqrt())).abs() < 1e-12);
        let huber = RadiusRule { epsilon: 0.1, ..k1 };
        assert!((huber.radius().unwrap() - 20f64.sqrt() / (0.1 + a).sqrt()).abs() < 1e-12);
        let huber2 = RadiusRule { epsilon: 0.1, ..rule };
        assert!((huber2.radius().unwrap() - 20f64.sqrt() / (0.1 + a).powf(0.25)).abs() < 1e-12);
        let json: OracleConfig = serde_json::from_str(r#"{"true_mean":[0.0],"radius":2.5}"#).unwrap();
        assert_eq!(json.radius, Radius::Literal(2.5));
    }

    #[test]
    fn srm_examples() {
        let s = SampleSet::from_column(&[0.0, 0.0, 0.0, 100.0]).unwrap();
        let fit = srm_bruteforce(&s, 0.25).unwrap();
        assert_eq!(fit.subset, vec![0, 1, 2]);
        assert_eq!(fit.estimate, vec![0.0]);

        let big = SampleSet::from_column(&[0.0; 26]).unwrap();
        assert!(matches!(srm_bruteforce(&big, 0.1), Err(Error::Refused(_))));
        // Ties resolve to the lexicographically first subset.
        let tie = SampleSet::from_column(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(srm_bruteforce(&tie, 0.3).unwrap().subset, vec![0, 1]);
    }

    #[test]
    fn srm_bias_closed_form() {
        assert_eq!(srm_population_bias(0.0, 5.0).unwrap(), 0.0);
        let v = srm_population_bias(0.1, 1.0).unwrap();
        assert!((v - 0.1 / 0.72f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.117851).abs() < 1e-6);
        assert!(srm_population_bias(0.5, 1.0).is_err());
    }

    #[test]
    fn srm_sup_over_distance_matches_closed_form() {
        for eps in [0.0, 0.05, 0.1, 0.2, 0.3] {
            for trace in [1.0, 4.0, 20.0] {
                let dstar = srm_threshold_distance(eps, trace, 0.0);
                // The bias grows linearly up to the threshold, then drops to 0.
                let grid_max = (0..=20_000)
                    .map(|i| srm_bias_at_distance(eps, trace, 2.0 * dstar * i as f64 / 20_000.0))
                    .fold(0.0, f64::max);
                let at_threshold = srm_bias_at_distance(eps, trace, dstar * (1.0 - 1e-14));
                let closed = srm_population_bias(eps, trace).unwrap();
                assert!((at_threshold - closed).abs() <= 1e-12 * closed.max(1.0), "{at_threshold} vs {closed}");
                assert!(grid_max <= closed * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn mixture_risk_decision_agrees() {
        for eps in [0.05, 0.1, 0.2] {
            let eta = eps / (1.0 - eps);
            for gap in [0.1, 0.5, 1.0, 1.2, 2.0, 5.0] {
                let keep = srm_mixture_risk(eta, 1.0, 0.0, gap * gap) <= srm_mixture_risk(0.0, 1.0, 0.0, gap * gap);
                assert_eq!(keep, srm_keeps_contamination(eps, 1.0, 0.0, gap * gap), "eps {eps} gap {gap}");
            }
        }
    }

    #[test]
    fn one_sided_moments() {
        let (m0, v0) = one_sided_conditional_moments(0.0, 200_000, 1).unwrap();
        assert!(m0.abs() < 0.01 && (v0 - 1.0).abs() < 0.02);
        for eps in [0.01, 0.05, 0.1] {
            let (m, v) = one_sided_conditional_moments(eps, 200_000, 2).unwrap();
            assert!(m < 0.0 && m.abs() <= 2.0 * eps.sqrt());
            assert!(v <= 1.0 / (1.0 - eps));
        }
        assert!(one_sided_conditional_moments(1.0, 10, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn srm_without_contamination_is_mean(n in 1usize..10, p in 1usize..4, seed in any::<u64>()) {
            let s = sample_dataset(&DistributionSpec::gaussian_identity(p), n, seed).unwrap();
            prop_assert_eq!(srm_bruteforce(&s, 0.0).unwrap().estimate, sample_mean(&s));
        }

        #[test]
        fn gmom_1d_is_median_of_block_means(half in 1usize..15, seed in any::<u64>()) {
            let blocks = 2 * half + 1;
            let s = sample_dataset(&DistributionSpec::pareto(1, 2.5), blocks * 4, seed).unwrap();
            let mut means: Vec<f64> = block_means(&s, blocks).unwrap().into_iter().map(|m| m[0]).collect();
            let gm = geometric_median_of_means(&s, blocks, 1e-12).unwrap()[0];
            means.sort_by(f64::total_cmp);
            prop_assert!((gm - means[half]).abs() <= 1e-8, "{} vs {}", gm, means[half]);
        }
    }
}
