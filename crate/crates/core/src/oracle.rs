//! Dense reference semigroup for small discretizations.
//!
//! `L = −M⁻¹K` is similar to the symmetric matrix `S = M^{−1/2} K M^{−1/2}`;
//! with `S = V Λ Vᵀ` the semigroup is `e^{tL} = M^{−1/2} V e^{−tΛ} Vᵀ M^{1/2}`.

use faer::{Mat, Side};

use crate::assembly::Discretization;
use crate::error::{Error, Result};

/// Largest problem the dense oracle accepts.
pub const MAX_DENSE: usize = 2000;

pub struct DenseOracle {
    pub eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    root_m: Vec<f64>,
}

impl DenseOracle {
    pub fn new(d: &Discretization) -> Result<Self> {
        let n = d.n_dofs();
        if n > MAX_DENSE {
            return Err(Error::Parameter(format!("dense oracle limited to {MAX_DENSE} unknowns, got {n}")));
        }
        let root_m: Vec<f64> = d.mass.iter().map(|m| m.sqrt()).collect();
        let mut s = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for (j, v) in d.stiffness.row(i) {
                s[(i, j)] = v / (root_m[i] * root_m[j]);
            }
        }
        let eig = s.self_adjoint_eigen(Side::Lower).map_err(|e| Error::numerical(format!("dense eigensolver failed: {e:?}"), f64::NAN))?;
        let eigenvalues = (0..n).map(|i| eig.S()[i]).collect();
        Ok(DenseOracle { eigenvalues, vectors: eig.U().to_owned(), root_m })
    }

    pub fn len(&self) -> usize {
        self.root_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root_m.is_empty()
    }

    /// `e^{tL} f`.
    pub fn apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if f.len() != n {
            return Err(Error::Shape { expected: n, actual: f.len() });
        }
        let g: Vec<f64> = f.iter().zip(&self.root_m).map(|(f, r)| f * r).collect();
        let mut coeff = vec![0.0; n];
        for (k, c) in coeff.iter_mut().enumerate() {
            let dot: f64 = (0..n).map(|i| self.vectors[(i, k)] * g[i]).sum();
            *c = dot * (-t * self.eigenvalues[k]).exp();
        }
        Ok((0..n).map(|i| (0..n).map(|k| self.vectors[(i, k)] * coeff[k]).sum::<f64>() / self.root_m[i]).collect())
    }

    /// Density `h(t, source, ·)` of a unit point mass.
    pub fn kernel(&self, source: usize, t: f64) -> Result<Vec<f64>> {
        if source >= self.len() {
            return Err(Error::Domain(format!("source {source} is not a degree of freedom")));
        }
        let mut f = vec![0.0; self.len()];
        f[source] = 1.0 / (self.root_m[source] * self.root_m[source]);
        self.apply(t, &f)
    }

    /// Smallest eigenvalue of `K v = λ M v`.
    pub fn bottom(&self) -> f64 {
        self.eigenvalues[0]
    }
}
