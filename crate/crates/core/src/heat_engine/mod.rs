//! Heat semigroup, kernels, harmonic solves and the checkable kernel properties.

mod bounds;
mod harmonic;
mod kirchhoff;
mod solver;
mod spectrum;
mod stepping;

use serde::Serialize;

pub(crate) use solver::SpdSolver;

pub use bounds::{gaussian_bound_check, node_distances, smoothness_probe, GaussianReport, SmoothnessReport};
pub use harmonic::solve_harmonic;
pub use kirchhoff::{kirchhoff_residual, one_sided_derivative, KirchhoffReport};
pub use spectrum::{spectral_bottom, SpectralReport};
pub use stepping::{heat_kernel, heat_kernels, step_heat, HeatPropagator, Scheme};

/// Values per degree of freedom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `∑ f_j m_j`.
    pub fn integrate(&self, mass: &[f64]) -> f64 {
        self.values.iter().zip(mass).map(|(f, m)| f * m).sum()
    }
}

/// `h(t, ξ₀, ·)` as a density against the lumped measure.
#[derive(Clone, Debug, Serialize)]
pub struct HeatKernelSlice {
    pub t: f64,
    pub source: usize,
    pub values: Field,
}
