//! Split-sample interval estimator for scalar data.
//!
//! The first half locates the shortest interval holding a prescribed count of
//! points; the estimate is the mean of the second-half points inside it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ceil_count, Confidence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalConfig {
    pub epsilon: f64,
    pub confidence: Confidence,
}

impl IntervalConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        Self::with_confidence(epsilon, Confidence::from_delta(delta)?)
    }

    pub fn with_confidence(epsilon: f64, confidence: Confidence) -> Result<Self> {
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::config(format!("epsilon must lie in [0, 0.5), got {epsilon}")));
        }
        Ok(Self { epsilon, confidence })
    }

    /// `2ε + √(ε·ln(4/δ)/n) + ln(4/δ)/n < 1/2` for half-size `n`.
    pub fn check_precondition(&self, half: usize) -> Result<()> {
        let n = half as f64;
        let l4 = self.confidence.log_scaled(4.0);
        let lhs = 2.0 * self.epsilon + (self.epsilon * l4 / n).sqrt() + l4 / n;
        if lhs < 0.5 {
            Ok(())
        } else {
            Err(Error::config(format!(
                "2ε + √(ε ln(4/δ)/n) + ln(4/δ)/n = {lhs:.4} must be < 1/2 (n = {half} per half)"
            )))
        }
    }

    /// Number of first-half points the interval must cover:
    /// `⌈n(1 − 2α − √(2α ln(4/δ)/n) − ln(4/δ)/n)⌉` clamped to `[1, n]`,
    /// with `α = max(ε, ln(1/δ)/n)`.
    pub fn cover_count(&self, half: usize) -> usize {
        let n = half as f64;
        let alpha = self.epsilon.max(self.confidence.log_inv() / n);
        let l4 = self.confidence.log_scaled(4.0);
        let frac = 1.0 - 2.0 * alpha - (2.0 * alpha * l4 / n).sqrt() - l4 / n;
        (ceil_count(n * frac).max(1.0) as usize).min(half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Shortest window `[values[i], values[i+m−1]]` of a sorted slice; ties go to
/// the smallest `i`.
pub fn shortest_interval(values: &[f64], m: usize) -> Result<Interval> {
    if m == 0 || m > values.len() {
        return Err(Error::arg(format!("window size {m} outside [1, {}]", values.len())));
    }
    let (best, _) = values
        .windows(m)
        .enumerate()
        .map(|(i, w)| (i, w[m - 1] - w[0]))
        .fold((0, f64::INFINITY), |acc, (i, width)| if width < acc.1 { (i, width) } else { acc });
    Ok(Interval { a: values[best], b: values[best + m - 1] })
}

/// The interval estimate of `samples` (length `2n`, split in the given order).
pub fn interval_estimate(samples: &[f64], config: &IntervalConfig) -> Result<f64> {
    Ok(interval_estimate_detailed(samples, config)?.0)
}

/// [`interval_estimate`] plus the interval found on the first half.
pub fn interval_estimate_detailed(samples: &[f64], config: &IntervalConfig) -> Result<(f64, Interval)> {
    if samples.len() < 4 || !samples.len().is_multiple_of(2) {
        return Err(Error::arg(format!("need an even number ≥ 4 of samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("non-finite sample"));
    }
    let half = samples.len() / 2;
    config.check_precondition(half)?;
    let (first, second) = samples.split_at(half);

    let mut sorted = first.to_vec();
    sorted.sort_by(f64::total_cmp);
    let interval = shortest_interval(&sorted, config.cover_count(half))?;

    let (sum, count) = second
        .iter()
        .filter(|&&x| interval.contains(x))
        .fold((0.0, 0usize), |(s, c), &x| (s + x, c + 1));
    if count == 0 {
        return Err(Error::EmptySecondHalf { a: interval.a, b: interval.b });
    }
    Ok((sum / count as f64, interval))
}
