use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::{walker_rng, EmpiricalMeasure};
use crate::assembly::Discretization;
use crate::error::{Error, Result};

/// Exit rates and cumulative jump tables of `L = −M⁻¹K`.
pub struct JumpChain {
    pub rate: Vec<f64>,
    row_ptr: Vec<usize>,
    targets: Vec<usize>,
    cumulative: Vec<f64>,
}

/// Marks a jump into the absorbing boundary.
pub(crate) const KILLED: usize = usize::MAX;

impl JumpChain {
    pub fn new(d: &Discretization) -> Self {
        let k = &d.stiffness;
        let mut row_ptr = vec![0];
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        let mut rate = Vec::with_capacity(d.n_dofs());
        for i in 0..d.n_dofs() {
            let kii = k.get(i, i);
            rate.push(kii / d.mass[i]);
            let mut acc = 0.0;
            for (j, v) in k.row(i) {
                if j != i && v < 0.0 {
                    acc += -v / kii;
                    targets.push(j);
                    cumulative.push(acc);
                }
            }
            if d.killing[i] > 0.0 {
                targets.push(KILLED);
                cumulative.push(1.0);
            } else if let Some(last) = cumulative.last_mut() {
                if targets.len() > row_ptr[i] {
                    *last = 1.0;
                }
            }
            row_ptr.push(targets.len());
        }
        JumpChain { rate, row_ptr, targets, cumulative }
    }

    /// Next state after a jump from `i`, or [`KILLED`].
    pub(crate) fn jump(&self, i: usize, u: f64) -> usize {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        let c = &self.cumulative[r.clone()];
        let k = c.partition_point(|&x| x <= u).min(c.len() - 1);
        self.targets[r.start + k]
    }

    pub(crate) fn can_move(&self, i: usize) -> bool {
        self.rate[i] > 0.0 && self.row_ptr[i + 1] > self.row_ptr[i]
    }

    /// Runs one walker from `source` up to time `t`; returns the final state or `None` if killed.
    pub(crate) fn walk<R: Rng>(&self, source: usize, t: f64, rng: &mut R) -> (Option<usize>, bool) {
        let mut state = source;
        let mut clock = 0.0;
        loop {
            if !self.can_move(state) {
                return (Some(state), true);
            }
            let hold: f64 = rng.sample::<f64, _>(Exp1) / self.rate[state];
            clock += hold;
            if clock > t {
                return (Some(state), false);
            }
            let next = self.jump(state, rng.random::<f64>());
            if next == KILLED {
                return (None, false);
            }
            state = next;
        }
    }
}

/// Exact simulation of the jump chain; returns the empirical law at time `t`.
pub fn sample_ctmc(d: &Discretization, source: usize, t: f64, n_paths: u64, seed: u64) -> Result<EmpiricalMeasure> {
    if source >= d.n_dofs() {
        return Err(Error::Domain(format!("source {source} is not a degree of freedom")));
    }
    if n_paths == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("time must be nonnegative, got {t}")));
    }
    let chain = JumpChain::new(d);
    let empty = EmpiricalMeasure::empty(&d.mass);
    let out = (0..n_paths)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut acc, w| {
                let mut rng = walker_rng(seed, w);
                let (state, frozen) = chain.walk(source, t, &mut rng);
                acc.total += 1;
                match state {
                    Some(s) => {
                        acc.counts[s] += 1;
                        acc.frozen += frozen as u64;
                    }
                    None => acc.killed += 1,
                }
                acc
            },
        )
        .reduce(|| empty.clone(), EmpiricalMeasure::merge);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid, BoundaryPolicy};
    use crate::metric_graph::MetricGraph;
    use crate::strip_complex::{Fiber, StripComplex};

    fn path5(policy: BoundaryPolicy) -> Discretization {
        let sc = StripComplex::flat(MetricGraph::path(&[4.0]).unwrap(), Fiber::Point).unwrap();
        let grid = build_grid(&sc, 5, 1).unwrap();
        assemble(&sc, &grid, policy).unwrap()
    }

    #[test]
    fn time_zero_keeps_everything_at_the_source() {
        let d = path5(BoundaryPolicy::Reflecting);
        let m = sample_ctmc(&d, 3, 0.0, 1000, 1).unwrap();
        assert_eq!(m.counts[3], 1000);
    }

    #[test]
    fn reflecting_chain_conserves_walkers() {
        let d = path5(BoundaryPolicy::Reflecting);
        let m = sample_ctmc(&d, 2, 3.0, 5000, 9).unwrap();
        assert_eq!(m.survivors(), 5000);
        assert_eq!(m.killed, 0);
    }

    #[test]
    fn absorbing_chain_loses_walkers() {
        let d = path5(BoundaryPolicy::Absorbing);
        let m = sample_ctmc(&d, 1, 5.0, 2000, 3).unwrap();
        assert!(m.killed > 0);
        assert_eq!(m.survivors() + m.killed, 2000);
    }

    #[test]
    fn counts_do_not_depend_on_thread_count() {
        let d = path5(BoundaryPolicy::Reflecting);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sample_ctmc(&d, 2, 1.0, 20_000, 42).unwrap())
        };
        assert_eq!(run(1).counts, run(4).counts);
    }
}
