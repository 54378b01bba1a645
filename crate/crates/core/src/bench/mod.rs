//! Seeded Monte-Carlo sweeps over estimators, sample sizes and dimensions.
//!
//! Every `(n, p)` cell and trial index maps to one data seed, so all methods
//! in a sweep see the same draws. Seeds depend only on the master seed, the
//! cell key and the trial index, which makes sweeps reproducible under any
//! execution order.

mod io;
mod summary;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

pub use io::{emit_csv, emit_summary_csv, read_csv, write_records, write_summary};
pub use summary::{summarize, summarize_grid, SummaryRow, DEFAULT_DELTA_GRID};

use crate::baselines::{
    coordinatewise_filter, geometric_median_of_means, oracle_truncated_mean, sample_mean, srm_bruteforce,
    OracleConfig, Radius, RadiusRule, SRM_MAX_N,
};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::filter::{
    cov_bound_hint, filter_multivariate, FilterConfig, HintSetting, StopMode, DEFAULT_THRESHOLD_FACTOR,
};
use crate::interval::{interval_estimate, IntervalConfig};
use crate::metrics::l2_loss;
use crate::model::{population_moments, sample_dataset, DistributionSpec, MomentProfile, SampleSet};
use crate::netmax::{self, build_half_cover, CoverSet, InnerEstimator, NetConfig};
use crate::numeric::{derive_seed, stable_hash, two_log_steps, Confidence};

pub const DEFAULT_TRIALS: usize = 2000;
/// Tolerance of the Weiszfeld iteration inside GMOM.
pub const GMOM_TOL: f64 = 1e-10;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_hint_constant() -> f64 {
    1.0
}

/// Estimator and its settings, tagged by `"method"` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodSpec {
    Mean,
    /// Geometric median-of-means; `blocks` defaults to `⌈2 ln(1/δ)⌉`.
    Gmom {
        #[serde(default)]
        blocks: Option<usize>,
    },
    /// Coordinate-wise univariate filter with `⌈2 ln(1/δ)⌉` steps.
    Coord,
    /// Multivariate filter. Without a bound it removes `⌈2 ln(1/δ)⌉` points.
    /// A literal `cov_bound` or a `hint` (computed from the population
    /// moments) switches the default stop mode to the threshold rule.
    Filter {
        #[serde(default)]
        cov_bound: Option<f64>,
        #[serde(default)]
        hint: Option<HintSetting>,
        #[serde(default = "default_hint_constant")]
        hint_constant: f64,
        #[serde(default)]
        threshold_factor: Option<f64>,
        #[serde(default)]
        stop_mode: Option<StopMode>,
    },
    /// Truncated mean around the true mean. The radius defaults to the rule
    /// matching the population moments and contamination level.
    Oracle {
        #[serde(default)]
        radius: Option<f64>,
    },
    Srm {
        #[serde(default)]
        epsilon: Option<f64>,
    },
    /// Univariate interval estimator (p = 1 only).
    Interval {
        #[serde(default)]
        epsilon: Option<f64>,
    },
    Net {
        #[serde(default = "default_inner")]
        inner: InnerEstimator,
        #[serde(default)]
        sparsity: Option<usize>,
        #[serde(default)]
        epsilon: Option<f64>,
    },
}

fn default_inner() -> InnerEstimator {
    InnerEstimator::Interval1d
}

impl MethodSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            MethodSpec::Mean => "mean",
            MethodSpec::Gmom { .. } => "gmom",
            MethodSpec::Coord => "coord",
            MethodSpec::Filter { .. } => "filter",
            MethodSpec::Oracle { .. } => "oracle",
            MethodSpec::Srm { .. } => "srm",
            MethodSpec::Interval { .. } => "interval",
            MethodSpec::Net { .. } => "net",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEntry {
    /// Name written to the `method` column; defaults to the method kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub spec: MethodSpec,
}

impl MethodEntry {
    pub fn new(spec: MethodSpec) -> Self {
        Self { label: None, spec }
    }

    pub fn labeled(label: impl Into<String>, spec: MethodSpec) -> Self {
        Self { label: Some(label.into()), spec }
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.spec.kind())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub distribution: DistributionSpec,
    pub methods: Vec<MethodEntry>,
    pub n_values: Vec<usize>,
    /// Defaults to the distribution's own dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<usize>>,
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl TrialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(format!("trial config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.p_values.clone().unwrap_or_else(|| vec![self.distribution.p])
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.methods.is_empty() || self.n_values.is_empty() || self.dims().is_empty() {
            return Err(Error::config("methods, n_values and p_values must be nonempty"));
        }
        Confidence::from_delta(self.delta)?;
        let mut names = HashSet::new();
        for m in &self.methods {
            if !names.insert(m.name()) {
                return Err(Error::config(format!("duplicate method name {:?}", m.name())));
            }
        }
        for p in self.dims() {
            let spec = self.distribution.with_dim(p)?;
            for &n in &self.n_values {
                if n == 0 {
                    return Err(Error::config("n must be positive"));
                }
                for m in &self.methods {
                    validate_method(&m.spec, &spec, n, self.delta)
                        .map_err(|e| Error::config(format!("method {:?} at n={n}, p={p}: {e}", m.name())))?;
                }
            }
        }
        Ok(())
    }
}

/// One trial of one method. `loss` is `+∞` for a failed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: String,
    pub family: String,
    pub n: usize,
    pub p: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub trial_index: usize,
    pub loss: f64,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        !self.loss.is_finite()
    }

    fn sort_key(&self) -> (&str, &str, usize, usize, u64, u64, usize) {
        (&self.method, &self.family, self.n, self.p, self.delta.to_bits(), self.epsilon.to_bits(), self.trial_index)
    }
}

pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

fn clean_moments(spec: &DistributionSpec) -> Result<MomentProfile> {
    let clean = DistributionSpec { contamination: None, ..spec.clone() };
    population_moments(&clean)
}

/// Everything a method needs that does not change across trials of a cell.
struct Prepared {
    filter: Option<FilterConfig>,
    oracle: Option<OracleConfig>,
    net: Option<NetConfig>,
}

fn steps_for(delta: f64) -> Result<usize> {
    Ok(two_log_steps(Confidence::from_delta(delta)?))
}

fn prepare(method: &MethodSpec, spec: &DistributionSpec, n: usize, delta: f64) -> Result<Prepared> {
    let mut out = Prepared { filter: None, oracle: None, net: None };
    let eps = spec.epsilon();
    match method {
        MethodSpec::Filter { cov_bound, hint, hint_constant, threshold_factor, stop_mode } => {
            let bound = match (cov_bound, hint) {
                (Some(_), Some(_)) => return Err(Error::config("give either cov_bound or hint, not both")),
                (Some(b), None) => Some(*b),
                (None, Some(h)) => {
                    Some(cov_bound_hint(*h, &clean_moments(spec)?, n, spec.p, delta, eps, *hint_constant)?)
                }
                (None, None) => None,
            };
            let mode = match (stop_mode, bound) {
                (Some(m), _) => *m,
                (None, Some(_)) => StopMode::Threshold,
                (None, None) => StopMode::FixedSteps { steps: steps_for(delta)? },
            };
            if bound.is_none() && !matches!(mode, StopMode::FixedSteps { .. }) {
                return Err(Error::config("threshold and capped stop modes need cov_bound or hint"));
            }
            let cfg = FilterConfig {
                cov_bound: bound.unwrap_or(0.0),
                threshold_factor: threshold_factor.unwrap_or(DEFAULT_THRESHOLD_FACTOR),
                stop_mode: mode,
                seed: 0,
            };
            cfg.validate()?;
            out.filter = Some(cfg);
        }
        MethodSpec::Oracle { radius } => {
            let radius = match radius {
                Some(r) => Radius::Literal(*r),
                None => Radius::Rule(RadiusRule::from_moments(&clean_moments(spec)?, n, delta, eps)),
            };
            let cfg = OracleConfig { true_mean: spec.clean_mean(), radius };
            cfg.resolve_radius()?;
            out.oracle = Some(cfg);
        }
        MethodSpec::Net { inner, sparsity, epsilon } => {
            let mut cfg = NetConfig::new(epsilon.unwrap_or(eps), delta, *inner);
            cfg.sparsity = *sparsity;
            cfg.execution = Execution::Sequential;
            cfg.direction_confidence(spec.p)?;
            if *inner == InnerEstimator::Interval1d {
                let conf = cfg.direction_confidence(spec.p)?;
                IntervalConfig::with_confidence(cfg.epsilon, conf)?.check_precondition(n / 2)?;
            }
            out.net = Some(cfg);
        }
        _ => {}
    }
    Ok(out)
}

fn validate_method(method: &MethodSpec, spec: &DistributionSpec, n: usize, delta: f64) -> Result<()> {
    match method {
        MethodSpec::Gmom { blocks } => {
            let b = match blocks {
                Some(b) => *b,
                None => steps_for(delta)?,
            };
            if b == 0 || b > n {
                return Err(Error::config(format!("block count {b} outside [1, {n}]")));
            }
        }
        MethodSpec::Srm { epsilon } => {
            if n > SRM_MAX_N {
                return Err(Error::config(format!("srm is limited to n ≤ {SRM_MAX_N}")));
            }
            let e = epsilon.unwrap_or(spec.epsilon());
            if !(0.0..1.0).contains(&e) {
                return Err(Error::config("srm epsilon must lie in [0, 1)"));
            }
        }
        MethodSpec::Interval { epsilon } => {
            if spec.p != 1 {
                return Err(Error::config("the interval estimator is univariate; use p = 1"));
            }
            let cfg = IntervalConfig::new(epsilon.unwrap_or(spec.epsilon()), delta)?;
            cfg.check_precondition(n / 2)?;
        }
        _ => {}
    }
    prepare(method, spec, n, delta).map(|_| ())
}

fn run_method(
    method: &MethodSpec,
    prepared: &Prepared,
    spec: &DistributionSpec,
    data: &SampleSet,
    delta: f64,
    seed: u64,
    cover: Option<&CoverSet>,
) -> Result<Vec<f64>> {
    match method {
        MethodSpec::Mean => Ok(sample_mean(data)),
        MethodSpec::Gmom { blocks } => {
            let b = match blocks {
                Some(b) => *b,
                None => steps_for(delta)?,
            };
            geometric_median_of_means(data, b, GMOM_TOL)
        }
        MethodSpec::Coord => coordinatewise_filter(data, delta, seed),
        MethodSpec::Filter { .. } => {
            let cfg = prepared.filter.expect("prepared filter").with_seed(seed);
            Ok(filter_multivariate(data, &cfg)?.estimate)
        }
        MethodSpec::Oracle { .. } => oracle_truncated_mean(data, prepared.oracle.as_ref().expect("prepared oracle")),
        MethodSpec::Srm { epsilon } => Ok(srm_bruteforce(data, epsilon.unwrap_or(spec.epsilon()))?.estimate),
        MethodSpec::Interval { epsilon } => {
            let cfg = IntervalConfig::new(epsilon.unwrap_or(spec.epsilon()), delta)?;
            let mut values = data.column(0);
            values.truncate(values.len() - values.len() % 2);
            Ok(vec![interval_estimate(&values, &cfg)?])
        }
        MethodSpec::Net { .. } => {
            let cfg = prepared.net.as_ref().expect("prepared net");
            let cover = cover.expect("cover built for net methods");
            Ok(netmax::net_estimate_with_cover(data, cfg, cover, seed)?.estimate)
        }
    }
}

/// Key shared by all methods for the data of one `(n, p)` cell.
pub fn data_cell_key(spec: &DistributionSpec, n: usize) -> String {
    format!("{}|{}|{}|{:e}", spec.family.name(), n, spec.p, spec.epsilon())
}

pub fn data_seed(master_seed: u64, spec: &DistributionSpec, n: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(master_seed, stable_hash(&data_cell_key(spec, n))), trial as u64)
}

pub fn method_seed(data_seed: u64, method_name: &str) -> u64 {
    derive_seed(data_seed, stable_hash(method_name))
}

fn cover_seed(master_seed: u64, p: usize, sparsity: Option<usize>) -> u64 {
    derive_seed(master_seed, stable_hash(&format!("cover|{p}|{}", sparsity.unwrap_or(0))))
}

/// Runs every `(method, n, p, trial)` combination and returns the records in
/// canonical order. Estimator failures become `+∞` rows.
pub fn run_sweep(config: &TrialConfig, exec: Execution) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let dims = config.dims();
    let specs: Vec<DistributionSpec> = dims.iter().map(|&p| config.distribution.with_dim(p)).collect::<Result<_>>()?;

    // Covers depend only on (p, sparsity); build each once.
    let mut covers: BTreeMap<(usize, Option<usize>), CoverSet> = BTreeMap::new();
    for spec in &specs {
        for m in &config.methods {
            if let MethodSpec::Net { sparsity, .. } = m.spec {
                if let std::collections::btree_map::Entry::Vacant(slot) = covers.entry((spec.p, sparsity)) {
                    slot.insert(build_half_cover(spec.p, sparsity, cover_seed(config.master_seed, spec.p, sparsity))?);
                }
            }
        }
    }

    struct Cell<'a> {
        spec: &'a DistributionSpec,
        n: usize,
        prepared: Vec<Prepared>,
    }
    let mut cells = Vec::new();
    for spec in &specs {
        for &n in &config.n_values {
            let prepared =
                config.methods.iter().map(|m| prepare(&m.spec, spec, n, config.delta)).collect::<Result<Vec<_>>>()?;
            cells.push(Cell { spec, n, prepared });
        }
    }

    let trials = config.trials;
    let tasks = cells.len() * trials;
    let batches = map_indexed(tasks, exec, |task| -> Result<Vec<TrialRecord>> {
        let cell = &cells[task / trials];
        let trial = task % trials;
        let seed = data_seed(config.master_seed, cell.spec, cell.n, trial);
        let data = sample_dataset(cell.spec, cell.n, seed)?;
        let truth = cell.spec.clean_mean();
        Ok(config
            .methods
            .iter()
            .zip(&cell.prepared)
            .map(|(m, prep)| {
                let sparsity = match m.spec {
                    MethodSpec::Net { sparsity, .. } => sparsity,
                    _ => None,
                };
                let cover = covers.get(&(cell.spec.p, sparsity));
                let loss = run_method(&m.spec, prep, cell.spec, &data, config.delta, method_seed(seed, m.name()), cover)
                    .and_then(|est| l2_loss(&est, &truth))
                    .unwrap_or(f64::INFINITY);
                TrialRecord {
                    method: m.name().to_string(),
                    family: cell.spec.family.name().to_string(),
                    n: cell.n,
                    p: cell.spec.p,
                    delta: config.delta,
                    epsilon: cell.spec.epsilon(),
                    trial_index: trial,
                    loss,
                }
            })
            .collect())
    });
    let mut records = Vec::with_capacity(tasks * config.methods.len());
    for batch in batches {
        records.extend(batch?);
    }
    sort_records(&mut records);
    Ok(records)
}
