use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Field, HeatKernelSlice, SpdSolver};
use crate::assembly::Discretization;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ie" | "implicit_euler" => Ok(Scheme::ImplicitEuler),
            "cn" | "crank_nicolson" => Ok(Scheme::CrankNicolson),
            other => Err(Error::Configuration(format!("unknown scheme '{other}' (expected ie or cn)"))),
        }
    }
}

/// θ-scheme for `M u' = −K u` with a single factorization of `M + θ dt K`.
pub struct HeatPropagator<'a> {
    d: &'a Discretization,
    scheme: Scheme,
    dt: f64,
    solver: SpdSolver,
    startup: usize,
}

impl<'a> HeatPropagator<'a> {
    pub fn new(d: &'a Discretization, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        let theta = match scheme {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        };
        let solver = SpdSolver::new(&d.stiffness, theta * dt, &d.mass)?;
        Ok(HeatPropagator { d, scheme, dt, solver, startup: 0 })
    }

    /// Replaces the first `steps` Crank–Nicolson steps by pairs of implicit
    /// Euler half steps, which damp the stiff modes of rough initial data.
    pub fn with_startup(mut self, steps: usize) -> Self {
        self.startup = steps;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn step(&self, u: &[f64], explicit_part: f64) -> Result<Vec<f64>> {
        let ku = self.d.stiffness.matvec(u)?;
        let rhs: Vec<f64> = u.iter().zip(&ku).zip(&self.d.mass).map(|((u, k), m)| m * u - explicit_part * k).collect();
        Ok(self.solver.solve(&rhs)?.0)
    }

    /// Applies `n` steps to `f0`.
    pub fn run(&self, f0: &[f64], n: usize) -> Result<Vec<f64>> {
        if f0.len() != self.d.n_dofs() {
            return Err(Error::Shape { expected: self.d.n_dofs(), actual: f0.len() });
        }
        let mut u = f0.to_vec();
        for k in 0..n {
            u = match self.scheme {
                Scheme::ImplicitEuler => self.step(&u, 0.0)?,
                Scheme::CrankNicolson if k < self.startup => {
                    let half = self.step(&u, 0.0)?;
                    self.step(&half, 0.0)?
                }
                Scheme::CrankNicolson => self.step(&u, 0.5 * self.dt)?,
            };
        }
        Ok(u)
    }

    /// `e^{tL} f0` for `t` an integer multiple of the step.
    pub fn evolve(&self, f0: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = steps_for(t, self.dt)?;
        self.run(f0, n)
    }

    /// Heat kernel slices from several sources, computed in parallel.
    pub fn kernels(&self, sources: &[usize], t: f64) -> Result<Vec<HeatKernelSlice>> {
        let n = steps_for(t, self.dt)?;
        sources
            .par_iter()
            .map(|&source| {
                let u0 = point_mass(self.d, source)?;
                Ok(HeatKernelSlice { t, source, values: Field::new(self.run(&u0, n)?) })
            })
            .collect()
    }
}

fn steps_for(t: f64, dt: f64) -> Result<usize> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Parameter(format!("time must be positive, got {t}")));
    }
    let n = (t / dt).round();
    if n < 1.0 || (n * dt - t).abs() > 1e-9 * t {
        return Err(Error::Parameter(format!("t = {t} is not a positive multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// `δ_source / m_source`, the density of a unit point mass.
fn point_mass(d: &Discretization, source: usize) -> Result<Vec<f64>> {
    if source >= d.n_dofs() {
        return Err(Error::Domain(format!("source {source} is not a degree of freedom (n = {})", d.n_dofs())));
    }
    let mut u = vec![0.0; d.n_dofs()];
    u[source] = 1.0 / d.mass[source];
    Ok(u)
}

/// Approximates `e^{tL} f0` with `ceil(t/dt)` equal steps.
pub fn step_heat(d: &Discretization, f0: &[f64], t: f64, dt: f64, scheme: Scheme) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t > 0.0 && dt <= t * (1.0 + 1e-12)) {
        return Err(Error::Parameter(format!("need 0 < dt <= t, got dt = {dt}, t = {t}")));
    }
    let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
    HeatPropagator::new(d, t / n as f64, scheme)?.run(f0, n)
}

/// `h(t, source, ·)` as a density.
pub fn heat_kernel(d: &Discretization, source: usize, t: f64, dt: f64, scheme: Scheme) -> Result<HeatKernelSlice> {
    let u0 = point_mass(d, source)?;
    Ok(HeatKernelSlice { t, source, values: Field::new(step_heat(d, &u0, t, dt, scheme)?) })
}

/// Kernels for several sources sharing one factorization.
pub fn heat_kernels(d: &Discretization, sources: &[usize], t: f64, dt: f64, scheme: Scheme) -> Result<Vec<HeatKernelSlice>> {
    let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
    HeatPropagator::new(d, t / n as f64, scheme)?.kernels(sources, t)
}
