use std::collections::BTreeMap;

use serde::Serialize;

use super::TrialRecord;
use crate::error::Result;
use crate::metrics::quantile_error;

/// δ values used for the quantile-versus-confidence view.
pub const DEFAULT_DELTA_GRID: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub n: usize,
    pub p: usize,
    pub delta: f64,
    /// `Q_δ` of the successful trials; NaN if every trial failed.
    pub q_delta: f64,
    pub mean_loss: f64,
    pub failure_rate: f64,
    /// All trials in the group, failed ones included.
    pub trials: usize,
}

/// Groups by `(method, n, p)` and reports `Q_δ` over successful trials.
pub fn summarize(records: &[TrialRecord], delta: f64) -> Result<Vec<SummaryRow>> {
    let mut groups: BTreeMap<(&str, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.method, r.n, r.p)).or_default().push(r.loss);
    }
    groups
        .into_iter()
        .map(|((method, n, p), losses)| {
            let ok: Vec<f64> = losses.iter().copied().filter(|l| l.is_finite()).collect();
            let (q_delta, mean_loss) = if ok.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (quantile_error(&ok, delta)?, ok.iter().sum::<f64>() / ok.len() as f64)
            };
            Ok(SummaryRow {
                method: method.to_string(),
                n,
                p,
                delta,
                q_delta,
                mean_loss,
                failure_rate: (losses.len() - ok.len()) as f64 / losses.len() as f64,
                trials: losses.len(),
            })
        })
        .collect()
}

/// [`summarize`] at every δ of `deltas`, concatenated.
pub fn summarize_grid(records: &[TrialRecord], deltas: &[f64]) -> Result<Vec<SummaryRow>> {
    let mut out = Vec::new();
    for &d in deltas {
        out.extend(summarize(records, d)?);
    }
    Ok(out)
}
