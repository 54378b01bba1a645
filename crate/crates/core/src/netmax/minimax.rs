//! Minimax center: `argmin_θ max_j |u_jᵀθ − m_j|`, optionally over s-sparse θ.
//!
//! The dense problem is the LP `min t s.t. −t ≤ u_jᵀθ − m_j ≤ t`. Its dual
//!
//! ```text
//! min Σ_j (a_j − b_j) m_j   s.t.  Σ_j (a_j − b_j) u_j = 0,  Σ_j (a_j + b_j) = 1,  a, b ≥ 0
//! ```
//!
//! has only `p + 1` rows, so it is solved by simplex and `θ` is read off the
//! multipliers. The dual optimum is a certified lower bound on the minimax
//! value, which is what the tolerance check compares against.

use serde::{Deserialize, Serialize};

use super::cover::binomial;
use super::lp::solve_equality_form;
use crate::error::{Error, Result};
use crate::linalg;

/// Exhaustive sparse search is used up to this many supports.
pub const MAX_EXHAUSTIVE_SUPPORTS: u128 = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseStrategy {
    /// Exhaustive when `C(p, s) ≤ 10⁴`, heuristic otherwise.
    #[default]
    Auto,
    Exhaustive,
    /// Hard-threshold the dense solution to its top `s` entries and re-solve.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxSolution {
    pub theta: Vec<f64>,
    /// `max_j |u_jᵀθ − m_j|` evaluated at `theta`.
    pub objective: f64,
    /// Lower bound on the optimal value over the feasible set searched.
    pub lower_bound: f64,
    /// Chosen support in the sparse case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    /// The sparse support came from hard thresholding, not exhaustive search.
    pub heuristic: bool,
}

/// `1e-8 · max(1, max|m_j|)`
pub fn default_tol(targets: &[f64]) -> f64 {
    1e-8 * targets.iter().fold(1.0f64, |a, m| a.max(m.abs()))
}

pub fn minimax_objective(directions: &[Vec<f64>], targets: &[f64], theta: &[f64]) -> f64 {
    directions
        .iter()
        .zip(targets)
        .map(|(u, m)| (linalg::dot(u, theta) - m).abs())
        .fold(0.0, f64::max)
}

pub fn minimax_center(
    directions: &[Vec<f64>],
    targets: &[f64],
    sparsity: Option<usize>,
    tol: f64,
) -> Result<MinimaxSolution> {
    minimax_center_with(directions, targets, sparsity, tol, SparseStrategy::Auto)
}

pub fn minimax_center_with(
    directions: &[Vec<f64>],
    targets: &[f64],
    sparsity: Option<usize>,
    tol: f64,
    strategy: SparseStrategy,
) -> Result<MinimaxSolution> {
    if directions.is_empty() {
        return Err(Error::arg("empty cover"));
    }
    if directions.len() != targets.len() {
        return Err(Error::arg(format!("{} directions but {} targets", directions.len(), targets.len())));
    }
    if !(tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    let p = directions[0].len();
    if p == 0 || directions.iter().any(|u| u.len() != p) {
        return Err(Error::arg("directions must share a positive dimension"));
    }
    if targets.iter().any(|m| !m.is_finite()) {
        return Err(Error::arg("non-finite target"));
    }

    match sparsity {
        None => solve_dense(directions, targets, tol),
        Some(s) if s >= p => solve_dense(directions, targets, tol),
        Some(s) => {
            let exhaustive = match strategy {
                SparseStrategy::Auto => binomial(p, s) <= MAX_EXHAUSTIVE_SUPPORTS,
                SparseStrategy::Exhaustive => true,
                SparseStrategy::Heuristic => false,
            };
            if exhaustive {
                let mut best: Option<MinimaxSolution> = None;
                for support in Combinations::new(p, s) {
                    let sol = solve_on_support(directions, targets, &support, tol)?;
                    if best.as_ref().is_none_or(|b| sol.objective < b.objective) {
                        best = Some(sol);
                    }
                }
                // With s = 0 the only candidate is θ = 0.
                best.map_or_else(|| solve_on_support(directions, targets, &[], tol), Ok)
            } else {
                let dense = solve_dense(directions, targets, tol)?;
                let mut order: Vec<usize> = (0..p).collect();
                order.sort_by(|&a, &b| dense.theta[b].abs().total_cmp(&dense.theta[a].abs()).then(a.cmp(&b)));
                let mut support = order[..s].to_vec();
                support.sort_unstable();
                let mut sol = solve_on_support(directions, targets, &support, tol)?;
                sol.heuristic = true;
                Ok(sol)
            }
        }
    }
}

fn solve_dense(directions: &[Vec<f64>], targets: &[f64], tol: f64) -> Result<MinimaxSolution> {
    let p = directions[0].len();
    let m = directions.len();
    let mut matrix = vec![vec![0.0; 2 * m]; p + 1];
    let mut cost = vec![0.0; 2 * m];
    for (j, (u, &t)) in directions.iter().zip(targets).enumerate() {
        for d in 0..p {
            matrix[d][j] = u[d];
            matrix[d][m + j] = -u[d];
        }
        matrix[p][j] = 1.0;
        matrix[p][m + j] = 1.0;
        cost[j] = t;
        cost[m + j] = -t;
    }
    let mut rhs = vec![0.0; p + 1];
    rhs[p] = 1.0;
    let lp = solve_equality_form(&matrix, &rhs, &cost)?;

    let theta = lp.duals[..p].to_vec();
    let objective = minimax_objective(directions, targets, &theta);
    let lower_bound = -lp.objective;
    if objective > lower_bound + tol {
        return Err(Error::Solver(format!(
            "minimax objective {objective} exceeds certified bound {lower_bound} by more than {tol}"
        )));
    }
    Ok(MinimaxSolution { theta, objective, lower_bound, support: None, heuristic: false })
}

/// Best θ supported on `support`: directions touching the support are solved
/// in the restricted coordinates; the others contribute the constant `|m_j|`.
fn solve_on_support(
    directions: &[Vec<f64>],
    targets: &[f64],
    support: &[usize],
    tol: f64,
) -> Result<MinimaxSolution> {
    let p = directions[0].len();
    let mut restricted = Vec::new();
    let mut restricted_targets = Vec::new();
    let mut floor: f64 = 0.0;
    for (u, &m) in directions.iter().zip(targets) {
        if support.iter().any(|&i| u[i] != 0.0) {
            restricted.push(support.iter().map(|&i| u[i]).collect::<Vec<f64>>());
            restricted_targets.push(m);
        } else {
            floor = floor.max(m.abs());
        }
    }
    let mut theta = vec![0.0; p];
    let lower_bound = if restricted.is_empty() {
        floor
    } else {
        let sub = solve_dense(&restricted, &restricted_targets, tol)?;
        for (&i, v) in support.iter().zip(&sub.theta) {
            theta[i] = *v;
        }
        sub.lower_bound.max(floor)
    };
    let objective = minimax_objective(directions, targets, &theta);
    Ok(MinimaxSolution { theta, objective, lower_bound, support: Some(support.to_vec()), heuristic: false })
}

/// Lexicographic k-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        if k == 0 {
            self.current = None;
        }
        Some(out)
    }
}
