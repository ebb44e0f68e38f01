use faer::{Mat, Side};
use serde::Serialize;

use super::SpdSolver;
use crate::assembly::{BoundaryPolicy, Discretization};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Smallest eigenvalue of `K v = λ M v`.
    pub lambda: f64,
    /// `‖K v − λ M v‖ / ‖K v‖` style relative residual of the returned pair.
    pub residual: f64,
    pub iterations: usize,
    pub shift: f64,
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Smallest generalized eigenvalue by shift-invert Lanczos on
/// `M^{1/2} (K + δM)^{-1} M^{1/2}` with full reorthogonalization.
///
/// `δ = 0` when the discretization has killing (absorbing boundary), and a
/// small positive shift otherwise so the reflecting null space is resolved.
pub fn spectral_bottom(d: &Discretization) -> Result<SpectralReport> {
    let n = d.n_dofs();
    let has_killing = d.policy == BoundaryPolicy::Absorbing && d.killing.iter().any(|&k| k > 0.0);
    let scale = d.stiffness.diagonal().iter().zip(&d.mass).map(|(k, m)| k / m).fold(0.0, f64::max);
    let shift = if has_killing { 0.0 } else { 1e-6 * scale.max(1e-300) };
    let shifted_mass: Vec<f64> = d.mass.iter().map(|m| shift * m).collect();
    let solver = SpdSolver::new(&d.stiffness, 1.0, &shifted_mass)?;
    let root_m: Vec<f64> = d.mass.iter().map(|m| m.sqrt()).collect();
    let apply = |y: &[f64]| -> Result<Vec<f64>> {
        let b: Vec<f64> = y.iter().zip(&root_m).map(|(y, r)| y * r).collect();
        let (x, _) = solver.solve(&b)?;
        Ok(x.iter().zip(&root_m).map(|(x, r)| x * r).collect())
    };

    let max_dim = n.min(60);
    let tol = 1e-11;
    let mut start: Vec<f64> = root_m.clone();
    let mut iterations = 0;
    for _restart in 0..100 {
        let s = norm(&start);
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|v| v / s).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            iterations += 1;
            let k = basis.len() - 1;
            let mut w = apply(&basis[k])?;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(w, v)| *w -= c * v);
                }
            }
            let b = norm(&w);
            let m = alpha.len();
            let (theta, coeffs) = top_ritz(&alpha, &beta)?;
            let residual = b * coeffs[m - 1].abs();
            let breakdown = b <= 1e-14 * theta.abs();
            if residual <= tol * theta || breakdown || m == n {
                return finish(d, &basis, &coeffs, theta, shift, &root_m, iterations);
            }
            if m == max_dim {
                start = combine(&basis, &coeffs);
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
    }
    Err(Error::numerical("shift-invert Lanczos did not converge", f64::NAN))
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; basis[0].len()];
    for (v, c) in basis.iter().zip(coeffs) {
        y.iter_mut().zip(v).for_each(|(y, v)| *y += c * v);
    }
    y
}

fn top_ritz(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numerical(format!("tridiagonal eigensolver failed: {e:?}"), f64::NAN))?;
    let s = eig.S();
    let u = eig.U();
    let top = m - 1;
    Ok((s[top], (0..m).map(|i| u[(i, top)]).collect()))
}

fn finish(
    d: &Discretization,
    basis: &[Vec<f64>],
    coeffs: &[f64],
    theta: f64,
    shift: f64,
    root_m: &[f64],
    iterations: usize,
) -> Result<SpectralReport> {
    let y = combine(basis, coeffs);
    let mut v: Vec<f64> = y.iter().zip(root_m).map(|(y, r)| y / r).collect();
    let mnorm = v.iter().zip(&d.mass).map(|(v, m)| v * v * m).sum::<f64>().sqrt();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign / mnorm);
    let lambda = (1.0 / theta - shift).max(0.0);
    let kv = d.stiffness.matvec(&v)?;
    let r: Vec<f64> = kv.iter().zip(&v).zip(&d.mass).map(|((k, v), m)| k - lambda * m * v).collect();
    let denom = norm(&kv).max(lambda * v.iter().zip(&d.mass).map(|(v, m)| (v * m).powi(2)).sum::<f64>().sqrt()).max(1e-300);
    Ok(SpectralReport { lambda, residual: norm(&r) / denom, iterations, shift, eigenvector: v })
}
