//! Dense helpers on row-major data: means, population covariance, and the
//! leading eigenpair by power iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::numeric::{rng_from_seed, Rng};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 10_000;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean of the selected rows of a row-major `n × p` buffer.
pub fn mean_of_rows(data: &[f64], p: usize, rows: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; p];
    for &i in rows {
        for (acc, x) in m.iter_mut().zip(&data[i * p..(i + 1) * p]) {
            *acc += x;
        }
    }
    let k = rows.len() as f64;
    m.iter_mut().for_each(|v| *v /= k);
    m
}

/// Population (1/|S|) covariance of the selected rows around `mean`, as a
/// row-major `p × p` buffer.
pub fn covariance_of_rows(data: &[f64], p: usize, rows: &[usize], mean: &[f64]) -> Vec<f64> {
    let mut cov = vec![0.0; p * p];
    let mut centered = vec![0.0; p];
    for &i in rows {
        for ((c, x), m) in centered.iter_mut().zip(&data[i * p..(i + 1) * p]).zip(mean) {
            *c = x - m;
        }
        for a in 0..p {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            let row = &mut cov[a * p..(a + 1) * p];
            for b in a..p {
                row[b] += ca * centered[b];
            }
        }
    }
    let k = rows.len() as f64;
    for a in 0..p {
        for b in a..p {
            let v = cov[a * p + b] / k;
            cov[a * p + b] = v;
            cov[b * p + a] = v;
        }
    }
    cov
}

pub fn mat_vec(mat: &[f64], p: usize, v: &[f64], out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate() {
        *o = dot(&mat[a * p..(a + 1) * p], v);
    }
}

#[derive(Debug, Clone)]
pub struct TopEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Leading eigenpair of a symmetric PSD matrix by power iteration.
///
/// Stops once `‖Mv − λv‖ ≤ tol·λ` with `λ = vᵀMv`. `start` (if given and
/// nonzero) warm-starts the iteration; otherwise a Gaussian start vector is
/// drawn from `rng`.
pub fn power_iteration(
    mat: &[f64],
    p: usize,
    start: Option<&[f64]>,
    rng: &mut Rng,
    tol: f64,
    max_iters: usize,
) -> TopEigen {
    debug_assert_eq!(mat.len(), p * p);
    let mut v: Vec<f64> = match start {
        Some(s) if norm(s) > 0.0 => s.to_vec(),
        _ => (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
    };
    normalize(&mut v);

    let mut w = vec![0.0; p];
    mat_vec(mat, p, &v, &mut w);
    if norm(&w) == 0.0 {
        // Start vector in the null space: restart on the largest diagonal.
        let (best, diag) = (0..p)
            .map(|a| (a, mat[a * p + a]))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if diag <= 0.0 {
            return TopEigen { value: 0.0, vector: v, iterations: 0, converged: true };
        }
        v.iter_mut().for_each(|x| *x = 0.0);
        v[best] = 1.0;
        mat_vec(mat, p, &v, &mut w);
    }

    let mut iterations = 0;
    loop {
        // w = M v
        let lambda = dot(&v, &w);
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if lambda <= 0.0 && norm(&w) == 0.0 {
            return TopEigen { value: 0.0, vector: v, iterations, converged: true };
        }
        if resid <= tol * lambda.abs() || iterations >= max_iters {
            return TopEigen {
                value: lambda.max(0.0),
                vector: v,
                iterations,
                converged: resid <= tol * lambda.abs(),
            };
        }
        v.copy_from_slice(&w);
        normalize(&mut v);
        mat_vec(mat, p, &v, &mut w);
        iterations += 1;
    }
}

/// Power iteration with the default tolerance and a seeded start.
pub fn top_eigen(mat: &[f64], p: usize, seed: u64) -> TopEigen {
    let mut rng = rng_from_seed(seed);
    power_iteration(mat, p, None, &mut rng, POWER_TOL, POWER_MAX_ITERS)
}

pub fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Largest eigenvalue of a small symmetric matrix via full decomposition.
pub fn symmetric_max_eigenvalue(mat: &[f64], p: usize) -> f64 {
    let m = DMatrix::from_row_slice(p, p, mat);
    SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// A factor `L` (row-major `p × p`) with `L Lᵀ = Σ` for symmetric PSD `Σ`,
/// built from the eigendecomposition so singular covariances are fine.
/// Returns `None` if `Σ` has an eigenvalue below `-psd_tol·max(1, ‖Σ‖)`.
pub fn psd_factor(mat: &[f64], p: usize, psd_tol: f64) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(p, p, mat);
    let eig = SymmetricEigen::new(m);
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, &e| a.max(e.abs()));
    if eig.eigenvalues.iter().any(|&e| e < -psd_tol * scale) {
        return None;
    }
    let mut out = vec![0.0; p * p];
    for a in 0..p {
        for b in 0..p {
            out[a * p + b] = eig.eigenvectors[(a, b)] * eig.eigenvalues[b].max(0.0).sqrt();
        }
    }
    Some(out)
}
