//! Dense two-phase simplex for small equality-form LPs
//! `min cᵀz  s.t.  M z = r, z ≥ 0`, with Bland's anti-cycling rule.
//!
//! Sized for minimax aggregation: a handful of rows, a few thousand columns.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub objective: f64,
    /// Simplex multipliers `π` with `cⱼ − πᵀMⱼ ≥ 0` for every column at the
    /// optimum. Zero for rows found to be redundant.
    pub duals: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs, one per column (structural then artificial).
    cost: Vec<f64>,
    basis: Vec<usize>,
    structural: usize,
    rhs: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        self.rows[row].iter_mut().for_each(|x| *x /= piv);
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                r.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
                r[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            self.cost.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Runs simplex pivots over structural entering columns until optimal.
    fn optimize(&mut self, cost_eps: f64) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..self.structural).find(|&j| self.cost[j] < -cost_eps) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                let a = r[col];
                if a > PIVOT_EPS {
                    let ratio = r[self.rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Solver("linear program is unbounded".into()));
            };
            self.pivot(row, col);
        }
        Err(Error::Solver(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let width = self.rhs + 1;
        let mut d = vec![0.0; width];
        d[..costs.len()].copy_from_slice(costs);
        for (r, &b) in self.rows.iter().zip(&self.basis) {
            let cb = costs.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                d.iter_mut().zip(r).for_each(|(x, a)| *x -= cb * a);
            }
        }
        self.cost = d;
    }
}

/// Solves `min cᵀz s.t. M z = r, z ≥ 0`. `matrix` is given by rows.
pub(crate) fn solve_equality_form(matrix: &[Vec<f64>], r: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = matrix.len();
    let n = c.len();
    if r.len() != m || matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Solver("inconsistent LP dimensions".into()));
    }
    let rhs = n + m;
    let mut flipped = vec![false; m];
    let mut rows = Vec::with_capacity(m);
    for (i, (row, &ri)) in matrix.iter().zip(r).enumerate() {
        let sign = if ri < 0.0 {
            flipped[i] = true;
            -1.0
        } else {
            1.0
        };
        let mut t = vec![0.0; rhs + 1];
        t[..n].iter_mut().zip(row).for_each(|(x, a)| *x = sign * a);
        t[n + i] = 1.0;
        t[rhs] = sign * ri;
        rows.push(t);
    }
    let mut tab = Tableau { rows, cost: Vec::new(), basis: (n..n + m).collect(), structural: n, rhs };

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|x| *x = 1.0);
    tab.set_costs(&phase1);
    tab.optimize(1e-12)?;
    let infeasibility: f64 = tab
        .rows
        .iter()
        .zip(&tab.basis)
        .filter(|(_, &b)| b >= n)
        .map(|(r, _)| r[rhs])
        .sum();
    let scale = 1.0 + r.iter().map(|x| x.abs()).sum::<f64>();
    if infeasibility > 1e-9 * scale {
        return Err(Error::Solver("linear program is infeasible".into()));
    }

    // Drive artificials out of the basis where a structural pivot exists;
    // rows with none are redundant and keep a zero multiplier.
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.rows[i][j].abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    tab.set_costs(&phase2);
    let cscale = c.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    tab.optimize(1e-12 * cscale)?;

    let mut objective = 0.0;
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        if b < n {
            objective += c[b] * row[rhs];
        }
    }
    // Artificial column i has phase-2 cost 0, so its reduced cost is −πᵢ.
    let duals = (0..m)
        .map(|i| {
            let pi = -tab.cost[n + i];
            if flipped[i] {
                -pi
            } else {
                pi
            }
        })
        .collect();
    Ok(LpSolution { objective, duals })
}
