//! Sample containers, synthetic distributions and Huber contamination.
//!
//! Heavy-tailed families draw i.i.d. coordinates and are centered so the clean
//! population mean is exactly zero. Contamination replaces each row
//! independently with probability ε by a draw from the contaminating law.

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric::rng_from_seed;

/// Symmetry / PSD tolerance for user-supplied covariances.
pub const COVARIANCE_TOL: f64 = 1e-10;
/// Default Pareto tail index.
pub const DEFAULT_TAIL_BETA: f64 = 3.0;

/// `n × p` observations, stored row-major. Row `i` is one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl SampleSet {
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::arg(format!("sample set needs n ≥ 1 and p ≥ 1, got {n}×{p}")));
        }
        if data.len() != n * p {
            return Err(Error::arg(format!("expected {} values for {n}×{p}, got {}", n * p, data.len())));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::arg(format!("non-finite value in row {}", i / p)));
        }
        Ok(Self { data, n, p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::arg("rows have differing lengths"));
        }
        Self::new(rows.concat(), rows.len(), p)
    }

    /// One-dimensional sample set.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), values.len(), 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// `{uᵀxᵢ}` for every row.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        self.rows().map(|r| linalg::dot(r, u)).collect()
    }

    /// Adds `shift` to every row.
    pub fn translate(&mut self, shift: &[f64]) {
        assert_eq!(shift.len(), self.p);
        for row in self.data.chunks_exact_mut(self.p) {
            row.iter_mut().zip(shift).for_each(|(x, s)| *x += s);
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// The first `m` rows.
    pub fn head(&self, m: usize) -> Result<Self> {
        Self::new(self.data[..m.min(self.n) * self.p].to_vec(), m.min(self.n), self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Lognormal,
    Pareto,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Lognormal => "lognormal",
            Family::Pareto => "pareto",
        }
    }
}

/// The contaminating law `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContaminationSpec {
    PointMass { location: Vec<f64> },
    ShiftedGaussian { shift: Vec<f64>, scale: f64 },
}

impl ContaminationSpec {
    fn dim(&self) -> usize {
        match self {
            ContaminationSpec::PointMass { location } => location.len(),
            ContaminationSpec::ShiftedGaussian { shift, .. } => shift.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contamination {
    pub epsilon: f64,
    pub q_spec: ContaminationSpec,
}

/// Declarative sampling distribution, optionally Huber-contaminated.
///
/// `covariance` defaults to the identity for the Gaussian family and
/// `tail_beta` to [`DEFAULT_TAIL_BETA`] for Pareto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub family: Family,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contamination: Option<Contamination>,
}

impl DistributionSpec {
    pub fn gaussian_identity(p: usize) -> Self {
        Self { family: Family::Gaussian, p, covariance: None, tail_beta: None, contamination: None }
    }

    pub fn gaussian(covariance: Vec<Vec<f64>>) -> Self {
        Self {
            family: Family::Gaussian,
            p: covariance.len(),
            covariance: Some(covariance),
            tail_beta: None,
            contamination: None,
        }
    }

    pub fn lognormal(p: usize) -> Self {
        Self { family: Family::Lognormal, p, covariance: None, tail_beta: None, contamination: None }
    }

    pub fn pareto(p: usize, tail_beta: f64) -> Self {
        Self { family: Family::Pareto, p, covariance: None, tail_beta: Some(tail_beta), contamination: None }
    }

    pub fn with_contamination(mut self, epsilon: f64, q_spec: ContaminationSpec) -> Self {
        self.contamination = Some(Contamination { epsilon, q_spec });
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.contamination.as_ref().map_or(0.0, |c| c.epsilon)
    }

    pub fn tail_beta(&self) -> f64 {
        self.tail_beta.unwrap_or(DEFAULT_TAIL_BETA)
    }

    /// Copy of this spec in dimension `p`. Fails if explicit covariance or
    /// contamination vectors pin a different dimension.
    pub fn with_dim(&self, p: usize) -> Result<Self> {
        let mut out = self.clone();
        out.p = p;
        out.validate()?;
        Ok(out)
    }

    /// Clean-component covariance as a row-major buffer (Gaussian only).
    fn covariance_flat(&self) -> Vec<f64> {
        match &self.covariance {
            Some(rows) => rows.concat(),
            None => {
                let mut m = vec![0.0; self.p * self.p];
                (0..self.p).for_each(|i| m[i * self.p + i] = 1.0);
                m
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        if p == 0 {
            return Err(Error::config("dimension p must be at least 1"));
        }
        match self.family {
            Family::Gaussian => {
                if self.tail_beta.is_some() {
                    return Err(Error::config("tail_beta applies to the pareto family only"));
                }
                if let Some(rows) = &self.covariance {
                    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                        return Err(Error::config(format!("covariance must be {p}×{p}")));
                    }
                    let flat = self.covariance_flat();
                    if flat.iter().any(|x| !x.is_finite()) {
                        return Err(Error::config("covariance has non-finite entries"));
                    }
                    for a in 0..p {
                        for b in 0..a {
                            let (x, y) = (flat[a * p + b], flat[b * p + a]);
                            if (x - y).abs() > COVARIANCE_TOL * (1.0 + x.abs().max(y.abs())) {
                                return Err(Error::config("covariance is not symmetric"));
                            }
                        }
                    }
                    if linalg::psd_factor(&flat, p, COVARIANCE_TOL).is_none() {
                        return Err(Error::config("covariance is not positive semidefinite"));
                    }
                }
            }
            Family::Lognormal => {
                if self.covariance.is_some() || self.tail_beta.is_some() {
                    return Err(Error::config("lognormal takes neither covariance nor tail_beta"));
                }
            }
            Family::Pareto => {
                if self.covariance.is_some() {
                    return Err(Error::config("covariance applies to the gaussian family only"));
                }
                let beta = self.tail_beta();
                if !(beta > 1.0 && beta.is_finite()) {
                    return Err(Error::config(format!("pareto tail_beta must exceed 1, got {beta}")));
                }
            }
        }
        if let Some(c) = &self.contamination {
            if !(0.0..0.5).contains(&c.epsilon) {
                return Err(Error::config(format!("epsilon must lie in [0, 0.5), got {}", c.epsilon)));
            }
            if c.q_spec.dim() != p {
                return Err(Error::config(format!(
                    "contamination vector has dimension {}, expected {p}",
                    c.q_spec.dim()
                )));
            }
            if let ContaminationSpec::ShiftedGaussian { scale, .. } = c.q_spec {
                if !(scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::config("shifted_gaussian scale must be finite and ≥ 0"));
                }
            }
        }
        Ok(())
    }

    /// Mean of the clean component, which every family centers at zero.
    pub fn clean_mean(&self) -> Vec<f64> {
        vec![0.0; self.p]
    }
}

/// Summary of the clean component's second moments.
///
/// `k` is the number of bounded 2k-moments (1 or 2): the 2k-moment bound
/// `E[(vᵀ(x−μ))^{2k}] ≤ C_{2k} (E[(vᵀ(x−μ))²])^k` holds for every unit `v`.
/// The constant `C_{2k}` is never used numerically; only the trace and
/// operator norm feed the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub k: u8,
    pub trace_sigma: f64,
    pub opnorm_sigma: f64,
}

impl MomentProfile {
    pub fn new(k: u8, trace_sigma: f64, opnorm_sigma: f64) -> Result<Self> {
        if !(k == 1 || k == 2) {
            return Err(Error::config(format!("moment order k must be 1 or 2, got {k}")));
        }
        if !(trace_sigma >= 0.0 && opnorm_sigma >= 0.0) || opnorm_sigma > trace_sigma * (1.0 + 1e-12) {
            return Err(Error::config("need 0 ≤ opnorm_sigma ≤ trace_sigma"));
        }
        Ok(Self { k, trace_sigma, opnorm_sigma })
    }

    /// `tr(Σ)/‖Σ‖₂`; 1 for a zero covariance.
    pub fn effective_rank(&self) -> f64 {
        if self.opnorm_sigma > 0.0 {
            self.trace_sigma / self.opnorm_sigma
        } else {
            1.0
        }
    }
}

/// Analytic clean-component moments.
pub fn population_moments(spec: &DistributionSpec) -> Result<MomentProfile> {
    if spec.contamination.as_ref().is_some_and(|c| c.epsilon > 0.0) {
        return Err(Error::config("population moments describe the clean component; drop the contamination"));
    }
    spec.validate()?;
    let p = spec.p as f64;
    match spec.family {
        Family::Gaussian => {
            let flat = spec.covariance_flat();
            let trace: f64 = (0..spec.p).map(|i| flat[i * spec.p + i]).sum();
            let op = linalg::symmetric_max_eigenvalue(&flat, spec.p).max(0.0);
            MomentProfile::new(2, trace, op.min(trace))
        }
        Family::Lognormal => {
            let e = std::f64::consts::E;
            let var = e * e - e;
            MomentProfile::new(2, p * var, var)
        }
        Family::Pareto => {
            let b = spec.tail_beta();
            if b <= 2.0 {
                return Err(Error::Unsupported(format!("pareto with tail_beta {b} ≤ 2 has infinite variance")));
            }
            let var = b / ((b - 1.0).powi(2) * (b - 2.0));
            MomentProfile::new(if b > 4.0 { 2 } else { 1 }, p * var, var)
        }
    }
}

/// Draws `n` rows from `spec`, deterministic in `seed`.
pub fn sample_dataset(spec: &DistributionSpec, n: usize, seed: u64) -> Result<SampleSet> {
    sample_dataset_labeled(spec, n, seed).map(|(s, _)| s)
}

/// Like [`sample_dataset`] but also reports which rows came from the
/// contaminating law.
pub fn sample_dataset_labeled(spec: &DistributionSpec, n: usize, seed: u64) -> Result<(SampleSet, Vec<bool>)> {
    if n == 0 {
        return Err(Error::config("n must be at least 1"));
    }
    spec.validate()?;
    let p = spec.p;
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; n * p];
    let mut labels = vec![false; n];

    let factor = match spec.family {
        Family::Gaussian => Some(
            linalg::psd_factor(&spec.covariance_flat(), p, COVARIANCE_TOL)
                .ok_or_else(|| Error::config("covariance is not positive semidefinite"))?,
        ),
        _ => None,
    };
    let lognormal = LogNormal::new(0.0, 1.0).expect("valid lognormal");
    let lognormal_mean = 0.5f64.exp();
    let beta = spec.tail_beta();
    let pareto = Pareto::new(1.0, beta).map_err(|e| Error::config(e.to_string()))?;
    let pareto_mean = beta / (beta - 1.0);
    let contamination = spec.contamination.as_ref().filter(|c| c.epsilon > 0.0);

    let mut z = vec![0.0; p];
    for (row, label) in data.chunks_exact_mut(p).zip(labels.iter_mut()) {
        if let Some(c) = contamination {
            if rng.random::<f64>() < c.epsilon {
                *label = true;
                match &c.q_spec {
                    ContaminationSpec::PointMass { location } => row.copy_from_slice(location),
                    ContaminationSpec::ShiftedGaussian { shift, scale } => {
                        for (x, s) in row.iter_mut().zip(shift) {
                            *x = s + scale * rng.sample::<f64, _>(StandardNormal);
                        }
                    }
                }
                continue;
            }
        }
        match spec.family {
            Family::Gaussian => {
                let l = factor.as_ref().expect("gaussian factor");
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                for (a, x) in row.iter_mut().enumerate() {
                    *x = linalg::dot(&l[a * p..(a + 1) * p], &z);
                }
            }
            Family::Lognormal => row.iter_mut().for_each(|x| *x = lognormal.sample(&mut rng) - lognormal_mean),
            Family::Pareto => row.iter_mut().for_each(|x| *x = pareto.sample(&mut rng) - pareto_mean),
        }
    }
    Ok((SampleSet::new(data, n, p)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_norm(s: &SampleSet) -> f64 {
        let rows: Vec<usize> = (0..s.n()).collect();
        linalg::norm(&linalg::mean_of_rows(s.data(), s.p(), &rows))
    }

    #[test]
    fn degenerate_gaussian_is_exactly_zero() {
        let spec = DistributionSpec::gaussian(vec![vec![0.0; 3]; 3]);
        let s = sample_dataset(&spec, 5, 11).unwrap();
        assert!(s.data().iter().all(|&x| x == 0.0));
        assert_eq!(s.n(), 5);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = DistributionSpec::pareto(4, 3.0)
            .with_contamination(0.2, ContaminationSpec::ShiftedGaussian { shift: vec![5.0; 4], scale: 0.5 });
        assert_eq!(sample_dataset(&spec, 100, 3).unwrap(), sample_dataset(&spec, 100, 3).unwrap());
        assert_ne!(sample_dataset(&spec, 100, 3).unwrap(), sample_dataset(&spec, 100, 4).unwrap());
    }

    #[test]
    fn lognormal_is_centered() {
        let s = sample_dataset(&DistributionSpec::lognormal(1), 1_000_000, 2024).unwrap();
        assert!(mean_norm(&s) < 0.01, "{}", mean_norm(&s));
    }

    #[test]
    fn every_family_is_centered() {
        let n = 1_000_000;
        for (i, spec) in [
            DistributionSpec::gaussian_identity(3),
            DistributionSpec::lognormal(3),
            DistributionSpec::pareto(3, 3.0),
        ]
        .iter()
        .enumerate()
        {
            let m = population_moments(spec).unwrap();
            let s = sample_dataset(spec, n, 77 + i as u64).unwrap();
            let bound = 5.0 * (m.trace_sigma / n as f64).sqrt();
            assert!(mean_norm(&s) < bound, "{:?}: {} ≥ {}", spec.family, mean_norm(&s), bound);
        }
    }

    #[test]
    fn contamination_rate() {
        let spec = DistributionSpec::gaussian_identity(1)
            .with_contamination(0.1, ContaminationSpec::PointMass { location: vec![1e6] });
        let s = sample_dataset(&spec, 100_000, 5).unwrap();
        let frac = s.data().iter().filter(|&&x| x == 1e6).count() as f64 / 1e5;
        assert!((frac - 0.1).abs() < 0.01, "{frac}");
        let (_, labels) = sample_dataset_labeled(&spec, 100_000, 5).unwrap();
        let labeled = labels.iter().filter(|&&b| b).count() as f64 / 1e5;
        assert_eq!(frac, labeled);
    }

    #[test]
    fn labels_track_rows() {
        let spec = DistributionSpec::lognormal(3)
            .with_contamination(0.3, ContaminationSpec::PointMass { location: vec![-100.0; 3] });
        let (s, labels) = sample_dataset_labeled(&spec, 500, 8).unwrap();
        for (row, &l) in s.rows().zip(&labels) {
            assert_eq!(row == [-100.0; 3].as_slice(), l);
        }
    }

    #[test]
    fn moments() {
        let m = population_moments(&DistributionSpec::gaussian_identity(4)).unwrap();
        assert_eq!((m.k, m.trace_sigma), (2, 4.0));
        assert!((m.opnorm_sigma - 1.0).abs() < 1e-12);

        let e = std::f64::consts::E;
        let m = population_moments(&DistributionSpec::lognormal(2)).unwrap();
        assert!((m.trace_sigma - 2.0 * (e * e - e)).abs() < 1e-12);
        assert!((m.trace_sigma - 9.3415).abs() < 1e-4);

        let m = population_moments(&DistributionSpec::pareto(1, 3.0)).unwrap();
        assert_eq!(m.k, 1);
        assert!((m.trace_sigma - 0.75).abs() < 1e-15);
        assert_eq!(population_moments(&DistributionSpec::pareto(1, 5.0)).unwrap().k, 2);
        assert!(matches!(
            population_moments(&DistributionSpec::pareto(1, 2.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn pareto_variance_matches_draws() {
        let spec = DistributionSpec::pareto(1, 5.0);
        let s = sample_dataset(&spec, 400_000, 1).unwrap();
        let var = s.data().iter().map(|x| x * x).sum::<f64>() / s.n() as f64;
        let exact = population_moments(&spec).unwrap().trace_sigma;
        assert!((var - exact).abs() < 0.05 * exact, "{var} vs {exact}");
    }

    #[test]
    fn invalid_specs() {
        assert!(DistributionSpec::pareto(2, 1.0).validate().is_err());
        assert!(DistributionSpec::gaussian(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).validate().is_err());
        assert!(DistributionSpec::gaussian(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).validate().is_err());
        let bad_eps = DistributionSpec::lognormal(1)
            .with_contamination(0.5, ContaminationSpec::PointMass { location: vec![0.0] });
        assert!(matches!(sample_dataset(&bad_eps, 3, 0), Err(Error::Config(_))));
        let bad_dim = DistributionSpec::lognormal(2)
            .with_contamination(0.1, ContaminationSpec::PointMass { location: vec![0.0] });
        assert!(bad_dim.validate().is_err());
    }

    #[test]
    fn json_field_names() {
        let spec = DistributionSpec::gaussian_identity(2)
            .with_contamination(0.1, ContaminationSpec::PointMass { location: vec![50.0, 0.0] });
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            text,
            r#"{"family":"gaussian","p":2,"contamination":{"epsilon":0.1,"q_spec":{"kind":"point_mass","location":[50.0,0.0]}}}"#
        );
        let parsed: DistributionSpec =
            serde_json::from_str(r#"{"family":"pareto","p":3,"tail_beta":2.5}"#).unwrap();
        assert_eq!(parsed, DistributionSpec::pareto(3, 2.5));
    }
}
