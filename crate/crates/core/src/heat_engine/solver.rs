use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::assembly::CsrMatrix;
use crate::error::{Error, Result};

/// Sparse Cholesky of `scale_k · K + diag(d)` with one step of iterative refinement.
pub(crate) struct SpdSolver {
    llt: Llt<usize, f64>,
    k: CsrMatrix,
    scale_k: f64,
    diag: Vec<f64>,
}

impl SpdSolver {
    pub fn new(k: &CsrMatrix, scale_k: f64, diag: &[f64]) -> Result<Self> {
        let a = k.to_faer_shifted(scale_k, diag, 1.0)?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::numerical(format!("Cholesky factorization failed: {e:?}"), f64::NAN))?;
        Ok(SpdSolver { llt, k: k.clone(), scale_k, diag: diag.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let kx = self.k.matvec(x).expect("sizes match");
        kx.iter().zip(x).zip(&self.diag).map(|((kx, x), d)| self.scale_k * kx + d * x).collect()
    }

    fn raw(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solves `A x = b`; returns the solution and the relative residual.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        if b.len() != self.n() {
            return Err(Error::Shape { expected: self.n(), actual: b.len() });
        }
        let mut x = self.raw(b);
        let r: Vec<f64> = b.iter().zip(self.apply(&x)).map(|(b, ax)| b - ax).collect();
        let dx = self.raw(&r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        let r2: Vec<f64> = b.iter().zip(self.apply(&x)).map(|(b, ax)| b - ax).collect();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rn = r2.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = if bn > 0.0 { rn / bn } else { rn };
        if !rel.is_finite() || rel > 1e-8 {
            return Err(Error::numerical("linear solve did not converge", rel));
        }
        Ok((x, rel))
    }
}
