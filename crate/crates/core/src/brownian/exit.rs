use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ctmc::{JumpChain, KILLED};
use super::walker_rng;
use crate::assembly::Discretization;
use crate::error::{Error, Result};

/// Walkers are stopped after this many jumps and reported as capped.
pub const MAX_JUMPS: u64 = 1_000_000;

/// First-exit distribution of the jump chain from a region of degrees of freedom.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExitLaw {
    /// Exit node (DOF index) and number of walkers that left through it.
    pub hits: BTreeMap<usize, u64>,
    pub total: u64,
    pub killed: u64,
    pub capped: u64,
}

impl ExitLaw {
    fn merge(mut self, other: ExitLaw) -> ExitLaw {
        for (k, v) in other.hits {
            *self.hits.entry(k).or_default() += v;
        }
        self.total += other.total;
        self.killed += other.killed;
        self.capped += other.capped;
        self
    }

    pub fn probability(&self, dof: usize) -> f64 {
        self.hits.get(&dof).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Mean of `u` at the exit point and its standard error; killed and capped walkers contribute zero.
    pub fn pairing(&self, u: &[f64]) -> (f64, f64) {
        let n = self.total as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for (&k, &c) in &self.hits {
            s1 += c as f64 * u[k];
            s2 += c as f64 * u[k] * u[k];
        }
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Samples the first exit of the jump chain from `region` (a mask over DOFs), started at `source`.
pub fn exit_distribution(d: &Discretization, region: &[bool], source: usize, n_paths: u64, seed: u64) -> Result<ExitLaw> {
    if region.len() != d.n_dofs() {
        return Err(Error::Shape { expected: d.n_dofs(), actual: region.len() });
    }
    if source >= d.n_dofs() || !region[source] {
        return Err(Error::Domain(format!("source {source} is not inside the region")));
    }
    if n_paths == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    let chain = JumpChain::new(d);
    let law = (0..n_paths)
        .into_par_iter()
        .fold(ExitLaw::default, |mut acc, w| {
            let mut rng = walker_rng(seed, w);
            acc.total += 1;
            let mut state = source;
            let mut jumps = 0;
            loop {
                if !chain.can_move(state) || jumps >= MAX_JUMPS {
                    acc.capped += 1;
                    break;
                }
                state = chain.jump(state, rng.random::<f64>());
                jumps += 1;
                if state == KILLED {
                    acc.killed += 1;
                    break;
                }
                if !region[state] {
                    *acc.hits.entry(state).or_default() += 1;
                    break;
                }
            }
            acc
        })
        .reduce(ExitLaw::default, ExitLaw::merge);
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid, BoundaryPolicy};
    use crate::metric_graph::MetricGraph;
    use crate::strip_complex::{Fiber, StripComplex};

    #[test]
    fn gamblers_ruin_on_a_path() {
        // Uniform path with 5 nodes: from node 1 the walk exits at 0 w.p. 3/4.
        let sc = StripComplex::flat(MetricGraph::path(&[4.0]).unwrap(), Fiber::Point).unwrap();
        let grid = build_grid(&sc, 5, 1).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap();
        let ends: Vec<usize> = d.dofs.iter().enumerate().filter(|(_, &n)| d.grid.edge_coordinate(n).0.is_none()).map(|(k, _)| k).collect();
        let mut region = vec![true; d.n_dofs()];
        for &k in &ends {
            region[k] = false;
        }
        let start = d.dofs.iter().position(|&n| {
            let (e, s) = d.grid.edge_coordinate(n);
            e.is_some() && (s - 1.0).abs() < 1e-12
        });
        let start = start.unwrap();
        let law = exit_distribution(&d, &region, start, 40_000, 5).unwrap();
        let near = ends.iter().copied().find(|&k| d.grid.point(d.dofs[k]).graph_point() == crate::metric_graph::GraphPoint::Vertex(0)).unwrap();
        let p = law.probability(near);
        assert!((p - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / 40_000.0).sqrt(), "p = {p}");
        assert_eq!(law.capped + law.killed, 0);
    }

    #[test]
    fn source_outside_region_is_rejected() {
        let sc = StripComplex::flat(MetricGraph::path(&[1.0]).unwrap(), Fiber::Point).unwrap();
        let grid = build_grid(&sc, 3, 1).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap();
        assert!(exit_distribution(&d, &[false, true, true], 0, 10, 0).is_err());
    }
}
