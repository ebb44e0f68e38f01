//! Fiber heat kernels, the subordinated resolvent `(1 + √(−Δ))⁻¹` and the
//! Poisson extension `e^{−s√(−Δ)}` on a circle.
//!
//! The resolvent kernel is evaluated from the heat kernel through
//!
//! ```text
//! G(x, y) = (1/√π) ∫₀^∞ e^{−t} ∫₀^∞ e^{−u} u^{−1/2} h(t²/4u, x, y) du dt,
//! ```
//!
//! after the substitution `u = w²`, with nested adaptive Gauss–Legendre rules.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_graded;

use std::f64::consts::PI;

/// Fiber for the kernels of this module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelFiber {
    Line,
    Circle { length: f64 },
}

impl KernelFiber {
    fn validate(&self) -> Result<()> {
        match *self {
            KernelFiber::Circle { length } if !(length.is_finite() && length > 0.0) => {
                Err(Error::Parameter(format!("circle length must be positive, got {length}")))
            }
            _ => Ok(()),
        }
    }

    /// Distance between `x` and `y` (around the circle when periodic).
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            KernelFiber::Line => (x - y).abs(),
            KernelFiber::Circle { length } => {
                let d = (x - y).rem_euclid(length);
                d.min(length - d)
            }
        }
    }
}

/// Heat kernel `h(t, x, y)` of `e^{tΔ}` on the fiber.
///
/// On the circle the Fourier series is used for `t ≥ L²/4π` and the sum of
/// Gaussian images otherwise; both are truncated once terms drop below `1e−16`
/// relative to the leading term.
pub fn heat_kernel_fiber(fiber: KernelFiber, t: f64, x: f64, y: f64) -> Result<f64> {
    fiber.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    Ok(kernel(fiber, t, fiber.distance(x, y)))
}

fn gaussian(t: f64, d: f64) -> f64 {
    (-d * d / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

fn kernel(fiber: KernelFiber, t: f64, d: f64) -> f64 {
    match fiber {
        KernelFiber::Line => gaussian(t, d),
        KernelFiber::Circle { length } => {
            if t < length * length / (4.0 * PI) {
                // d ≤ L/2, so the images decrease monotonically in n.
                let mut sum = gaussian(t, d);
                for n in 1.. {
                    let n = n as f64;
                    let term = gaussian(t, d + n * length) + gaussian(t, n * length - d);
                    sum += term;
                    if term <= 1e-16 * sum {
                        break;
                    }
                }
                sum
            } else {
                let w = 2.0 * PI / length;
                let mut sum = 1.0;
                for k in 1.. {
                    let k = k as f64;
                    let decay = (-(w * k).powi(2) * t).exp();
                    sum += 2.0 * decay * (w * k * d).cos();
                    if decay < 1e-16 {
                        break;
                    }
                }
                sum / length
            }
        }
    }
}

/// Truncation and tolerances for the double integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Upper limit of the `t` integral (the `e^{−t}` tail beyond is dropped).
    pub t_max: f64,
    /// Upper limit of the `w = √u` integral.
    pub w_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { t_max: 40.0, w_max: 7.0, rel_tol: 1e-10, abs_tol: 1e-13, max_depth: 48 }
    }
}

/// Dyadic panels toward zero in both variables.
const GRADING: u32 = 24;

/// Generic subordination integral with `h(τ)` supplied by the caller.
fn subordinate(h: &(dyn Fn(f64) -> f64 + Sync), spec: QuadratureSpec) -> Result<f64> {
    let inner = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let g = |w: f64| if w <= 0.0 { 0.0 } else { (-w * w).exp() * h(t * t / (4.0 * w * w)) };
        adaptive_graded(&g, 0.0, spec.w_max, GRADING, spec.abs_tol, spec.rel_tol, spec.max_depth).0 * (-t).exp()
    };
    let (value, err) = adaptive_graded(&inner, 0.0, spec.t_max, GRADING, spec.abs_tol, spec.rel_tol, spec.max_depth);
    let value = 2.0 / PI.sqrt() * value;
    if !value.is_finite() || err > 1e-6 * value.abs().max(1e-300) {
        return Err(Error::Numerical { message: format!("subordination quadrature did not converge (estimate {value}, error {err})"), residual: err });
    }
    Ok(value)
}

/// Kernel `G(x, y)` of `(1 + √(−Δ))⁻¹` on the fiber; off-diagonal only.
pub fn resolvent_kernel(fiber: KernelFiber, x: f64, y: f64, spec: QuadratureSpec) -> Result<f64> {
    fiber.validate()?;
    let d = fiber.distance(x, y);
    if d <= 0.0 {
        return Err(Error::Domain("the resolvent kernel is logarithmically singular on the diagonal".into()));
    }
    subordinate(&|tau| kernel(fiber, tau, d), spec)
}

/// The same quadrature applied to the multiplier `e^{−τλ}` of one eigenmode; equals `1/(1 + √λ)`.
pub fn resolvent_multiplier(lambda: f64, spec: QuadratureSpec) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("eigenvalue must be nonnegative, got {lambda}")));
    }
    subordinate(&|tau| (-tau * lambda).exp(), spec)
}

/// Fourier cosine coefficients `∫_M G(x, 0) cos(2πkx/L) dx` for `k = 0..=k_max`.
///
/// The log singularity at `x = 0` is resolved by dyadic panels.
pub fn circle_fourier_coefficients(length: f64, k_max: usize, spec: QuadratureSpec) -> Result<Vec<f64>> {
    KernelFiber::Circle { length }.validate()?;
    let half = length / 2.0;
    let panels: Vec<(f64, f64)> = (0..36).map(|j| (half * 0.5f64.powi(j + 1), half * 0.5f64.powi(j))).collect();
    let (nodes, weights) = crate::quadrature::gauss_legendre(16);
    let points: Vec<(f64, f64)> = panels
        .iter()
        .flat_map(|&(a, b)| nodes.iter().zip(&weights).map(move |(x, w)| (0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(x, _)| resolvent_kernel(KernelFiber::Circle { length }, x, 0.0, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=k_max)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / length;
            2.0 * points.iter().zip(&values).map(|(&(x, q), g)| q * g * (w * x).cos()).sum::<f64>()
        })
        .collect())
}

/// `e^{−s√(−Δ)} f` for samples `f` on a uniform grid of the circle of length `L`.
pub fn poisson_extension(length: f64, f: &[f64], s: f64) -> Result<Vec<f64>> {
    KernelFiber::Circle { length }.validate()?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("s must be nonnegative, got {s}")));
    }
    let n = f.len();
    if n == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = k.min(n - k) as f64;
        *c *= (-s * 2.0 * PI * freq / length).exp() / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let out = buf.iter().map(|c| c.re).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::quadrature::adaptive;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn circle_kernel_at_unit_time_on_the_diagonal() {
        // (1/2π) ∑_k e^{−k²}, summed directly.
        let mut series = 0.0;
        for k in -12i32..=12 {
            series += (-(k * k) as f64).exp();
        }
        series /= TAU;
        let h = heat_kernel_fiber(KernelFiber::Circle { length: TAU }, 1.0, 0.7, 0.7).unwrap();
        assert!((h - series).abs() < 1e-14, "{h} vs {series}");
    }

    #[test]
    fn image_and_series_branches_agree() {
        let fiber = KernelFiber::Circle { length: 3.0 };
        let switch = 9.0 / (4.0 * PI);
        for d in [0.0, 0.4, 1.5] {
            let below = kernel(fiber, switch * (1.0 - 1e-12), d);
            let above = kernel(fiber, switch, d);
            assert_relative_eq!(below, above, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernels_are_symmetric_and_normalized() {
        for fiber in [KernelFiber::Line, KernelFiber::Circle { length: 2.0 }] {
            for t in [0.01, 0.3, 2.0] {
                let a = heat_kernel_fiber(fiber, t, 0.3, -0.55).unwrap();
                let b = heat_kernel_fiber(fiber, t, -0.55, 0.3).unwrap();
                assert_eq!(a, b);
                let (lo, hi) = match fiber {
                    KernelFiber::Line => (0.1 - 40.0 * t.sqrt(), 0.1 + 40.0 * t.sqrt()),
                    KernelFiber::Circle { length } => (0.1 - length / 2.0, 0.1 + length / 2.0),
                };
                let f = |y: f64| kernel(fiber, t, fiber.distance(0.1, y));
                let mass = adaptive(&f, lo, 0.1, 1e-15, 1e-14, 40).0 + adaptive(&f, 0.1, hi, 1e-15, 1e-14, 40).0;
                assert!((mass - 1.0).abs() < 1e-12, "{fiber:?} t = {t}: {mass}");
            }
        }
    }

    #[test]
    fn multiplier_reproduces_the_resolvent_spectrum() {
        for k in 0..=8 {
            let g = resolvent_multiplier((k * k) as f64, QuadratureSpec::default()).unwrap();
            assert!((g - 1.0 / (1.0 + k as f64)).abs() < 1e-8, "k = {k}: {g}");
        }
    }

    #[test]
    fn line_kernel_matches_its_one_dimensional_form() {
        // Integrating out w gives G(d) = (1/π) ∫ e^{−t} t / (t² + d²) dt; values from
        // a 30-digit evaluation of that integral.
        let frozen = [(2.0, 0.046010198958214815), (0.5, 0.21412444802475796), (0.05, 0.7932685759885901)];
        for (d, want) in frozen {
            let g = resolvent_kernel(KernelFiber::Line, d, 0.0, QuadratureSpec::default()).unwrap();
            assert_relative_eq!(g, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn line_kernel_decreases_with_distance() {
        let spec = QuadratureSpec::default();
        let values: Vec<f64> = [0.1, 0.2, 0.5, 1.0, 2.0, 4.0].iter().map(|&d| resolvent_kernel(KernelFiber::Line, 0.0, d, spec).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{values:?}");
    }

    #[test]
    fn diagonal_is_rejected() {
        assert!(resolvent_kernel(KernelFiber::Line, 1.0, 1.0, QuadratureSpec::default()).is_err());
    }

    #[test]
    fn poisson_extension_of_a_single_mode() {
        let n = 32;
        let xs: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let f: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        assert!(poisson_extension(TAU, &f, 0.0).unwrap().iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-14);
        let s = 0.7;
        let g = poisson_extension(TAU, &f, s).unwrap();
        for (x, v) in xs.iter().zip(&g) {
            assert!((v - (-s).exp() * x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn poisson_extension_is_a_semigroup() {
        let f: Vec<f64> = (0..25).map(|j| ((j * 7919) % 13) as f64 - 6.0).collect();
        let direct = poisson_extension(5.0, &f, 0.9).unwrap();
        let composed = poisson_extension(5.0, &poisson_extension(5.0, &f, 0.4).unwrap(), 0.5).unwrap();
        for (a, b) in direct.iter().zip(&composed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_extension_is_harmonic() {
        // Residual of ∂_s² + ∂_x² by central differences; halving the step quarters it.
        let f = |x: f64| (x.sin() + 0.5 * (3.0 * x).cos()).exp();
        let residual = |n: usize| {
            let h = TAU / n as f64;
            let samples: Vec<f64> = (0..n).map(|j| f(h * j as f64)).collect();
            let s0 = 0.3;
            let layers: Vec<Vec<f64>> = [s0 - h, s0, s0 + h].iter().map(|&s| poisson_extension(TAU, &samples, s).unwrap()).collect();
            (0..n)
                .map(|j| {
                    let dss = (layers[0][j] - 2.0 * layers[1][j] + layers[2][j]) / (h * h);
                    let dxx = (layers[1][(j + n - 1) % n] - 2.0 * layers[1][j] + layers[1][(j + 1) % n]) / (h * h);
                    (dss + dxx).abs()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (residual(64), residual(128));
        assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
    }
}
