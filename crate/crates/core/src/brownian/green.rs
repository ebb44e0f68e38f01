use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use super::ctmc::{JumpChain, KILLED};
use super::walker_rng;
use crate::assembly::Discretization;
use crate::error::{Error, Result};

const CHUNK: u64 = 1024;

/// Truncated occupation-density estimates `G_T(ξ, ζ) = E ∫_0^T 1{X_t = ζ} dt / m(ζ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenCurve {
    pub horizons: Vec<f64>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n_paths: u64,
    /// Walkers still alive at the largest horizon.
    pub alive: u64,
}

impl GreenCurve {
    /// Ratio of the estimate at the last horizon to the one before it.
    pub fn final_ratio(&self) -> Option<f64> {
        let n = self.estimates.len();
        (n >= 2).then(|| self.estimates[n - 1] / self.estimates[n - 2])
    }
}

/// Monte Carlo occupation density of node `zeta` for walkers started at `xi`, at increasing horizons.
pub fn green_estimate(d: &Discretization, xi: usize, zeta: usize, horizons: &[f64], n_paths: u64, seed: u64) -> Result<GreenCurve> {
    if xi >= d.n_dofs() || zeta >= d.n_dofs() {
        return Err(Error::Domain("green estimate needs two degrees of freedom".into()));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) || horizons[0] <= 0.0 {
        return Err(Error::Parameter("horizons must be positive and increasing".into()));
    }
    if n_paths == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    let chain = JumpChain::new(d);
    let t_max = *horizons.last().unwrap();
    let h = horizons.len();
    // Fixed chunks summed in order keep the result independent of the thread count.
    let chunks: Vec<(Vec<f64>, Vec<f64>, u64)> = (0..n_paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s1 = vec![0.0; h];
            let mut s2 = vec![0.0; h];
            let mut alive = 0;
            let mut occ = vec![0.0; h];
            for w in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                let mut rng = walker_rng(seed, w);
                occ.iter_mut().for_each(|o| *o = 0.0);
                let mut state = xi;
                let mut clock = 0.0;
                let mut survived = false;
                loop {
                    let hold = if chain.can_move(state) { rng.sample::<f64, _>(Exp1) / chain.rate[state] } else { f64::INFINITY };
                    let end = clock + hold;
                    if state == zeta {
                        for (o, &t) in occ.iter_mut().zip(horizons) {
                            *o += (end.min(t) - clock).max(0.0);
                        }
                    }
                    if end > t_max {
                        survived = true;
                        break;
                    }
                    clock = end;
                    state = chain.jump(state, rng.random::<f64>());
                    if state == KILLED {
                        break;
                    }
                }
                alive += survived as u64;
                for k in 0..h {
                    s1[k] += occ[k];
                    s2[k] += occ[k] * occ[k];
                }
            }
            (s1, s2, alive)
        })
        .collect();
    let mut s1 = vec![0.0; h];
    let mut s2 = vec![0.0; h];
    let mut alive = 0;
    for (a, b, c) in chunks {
        for k in 0..h {
            s1[k] += a[k];
            s2[k] += b[k];
        }
        alive += c;
    }
    let n = n_paths as f64;
    let m = d.mass[zeta];
    let estimates = s1.iter().map(|s| s / n / m).collect();
    let std_errors = s1.iter().zip(&s2).map(|(a, b)| ((b / n - (a / n).powi(2)).max(0.0) / n).sqrt() / m).collect();
    Ok(GreenCurve { horizons: horizons.to_vec(), estimates, std_errors, n_paths, alive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid, BoundaryPolicy};
    use crate::metric_graph::MetricGraph;
    use crate::strip_complex::{Fiber, StripComplex};

    #[test]
    fn matches_the_inverse_stiffness_on_an_absorbing_path() {
        // Interior nodes of a unit-spaced path with both ends killed: G = K⁻¹,
        // and for K = tridiag(-1, 2, -1) on 3 nodes the middle entry of K⁻¹ is 1.
        let sc = StripComplex::flat(MetricGraph::path(&[4.0]).unwrap(), Fiber::Point).unwrap();
        let grid = build_grid(&sc, 5, 1).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Absorbing).unwrap();
        assert_eq!(d.n_dofs(), 3);
        let mid = d.dofs.iter().position(|&n| (d.grid.edge_coordinate(n).1 - 2.0).abs() < 1e-12).unwrap();
        let g = green_estimate(&d, mid, mid, &[5.0, 200.0], 40_000, 11).unwrap();
        assert!((g.estimates[1] - 1.0).abs() < 4.0 * g.std_errors[1], "{:?}", g);
        assert!(g.estimates[0] <= g.estimates[1]);
        assert_eq!(g.alive, 0);
    }
}
