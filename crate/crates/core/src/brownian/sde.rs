use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{walker_rng, EmpiricalMeasure};
use crate::assembly::{BoundaryPolicy, Discretization};
use crate::error::{Error, Result};
use crate::strip_complex::{Fiber, PointOnComplex, StripComplex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeOptions {
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug)]
struct State {
    edge: usize,
    s: f64,
    x: f64,
}

enum Step {
    Moved(State),
    Killed,
}

struct Walsh<'a> {
    sc: &'a StripComplex,
    absorbing: bool,
}

impl Walsh<'_> {
    fn diffusivity(&self, edge: usize, s: f64) -> f64 {
        let c = &self.sc.coeffs[edge];
        c.a.eval(s) / c.m.eval(s)
    }

    /// Picks an incident edge with probability proportional to `a_e(v)`.
    fn choose<R: Rng>(&self, v: usize, rng: &mut R) -> usize {
        let g = &self.sc.graph;
        let weights: Vec<f64> = g.adjacency[v].iter().map(|&e| self.sc.coeffs[e].a.eval(g.edges[e].coordinate_of(v))).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                return g.adjacency[v][k];
            }
            u -= w;
        }
        *g.adjacency[v].last().unwrap()
    }

    fn start<R: Rng>(&self, p: PointOnComplex, rng: &mut R) -> State {
        match p {
            PointOnComplex::Strip { edge, s, x } => State { edge, s, x },
            PointOnComplex::Manifold { vertex, x } => {
                let edge = self.choose(vertex, rng);
                State { edge, s: self.sc.graph.edges[edge].coordinate_of(vertex), x }
            }
        }
    }

    fn fold_fiber(&self, x: f64) -> f64 {
        match self.sc.fiber {
            Fiber::Point => 0.0,
            Fiber::Circle { length } => (x + length / 2.0).rem_euclid(length) - length / 2.0,
            Fiber::Interval { length } => {
                let y = (x + length / 2.0).rem_euclid(2.0 * length);
                (if y > length { 2.0 * length - y } else { y }) - length / 2.0
            }
        }
    }

    fn step<R: Rng>(&self, st: State, dt: f64, rng: &mut R) -> Result<Step> {
        let c = &self.sc.coeffs[st.edge];
        let (a, m) = (c.a.eval(st.s), c.m.eval(st.s));
        let sigma = (2.0 * a / m * dt).sqrt();
        let z1: f64 = rng.sample(StandardNormal);
        let s_new = st.s + c.a.derivative(st.s) / m * dt + sigma * z1;
        let x_new = if self.sc.fiber.dimension() > 0 {
            let z2: f64 = rng.sample(StandardNormal);
            self.fold_fiber(st.x + sigma * z2)
        } else {
            0.0
        };
        let edge = &self.sc.graph.edges[st.edge];
        let (v, overshoot) = if s_new < 0.0 {
            (edge.tail, -s_new)
        } else if s_new > edge.length {
            (edge.head, s_new - edge.length)
        } else {
            return Ok(Step::Moved(State { edge: st.edge, s: s_new, x: x_new }));
        };
        if self.absorbing && self.sc.graph.vertices[v].boundary {
            return Ok(Step::Killed);
        }
        let next = self.choose(v, rng);
        let scale = (self.diffusivity(next, self.sc.graph.edges[next].coordinate_of(v)) / self.diffusivity(st.edge, edge.coordinate_of(v))).sqrt();
        let depth = overshoot * scale;
        let target = &self.sc.graph.edges[next];
        if depth > target.length {
            return Err(Error::StepSize(format!(
                "a step of size {dt} crossed vertex {v} and then all of edge {next}; reduce dt"
            )));
        }
        let s = if target.tail == v { depth } else { target.length - depth };
        Ok(Step::Moved(State { edge: next, s, x: x_new }))
    }
}

/// Degree of freedom whose dual cell contains the state, or `None` on a pinned node.
fn bin(d: &Discretization, st: State) -> Option<usize> {
    let g = &d.grid;
    let s_nodes = &g.s_nodes[st.edge];
    let k = s_nodes.partition_point(|&s| s < st.s).min(s_nodes.len() - 1);
    let i = if k > 0 && (st.s - s_nodes[k - 1]) < (s_nodes[k] - st.s) { k - 1 } else { k };
    let j = (0..g.xs.len())
        .min_by(|&a, &b| {
            let da = g.fiber.displacement(st.x, g.xs[a]).abs();
            let db = g.fiber.displacement(st.x, g.xs[b]).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0);
    d.dof_of_node[g.node(st.edge, i, j)]
}

/// Euler–Maruyama with Walsh-type vertex crossing; positions at time `t` are binned onto the DOFs of `d`.
pub fn sample_sde(d: &Discretization, source: PointOnComplex, t: f64, opts: SdeOptions) -> Result<EmpiricalMeasure> {
    let sc = &d.complex;
    sc.check_point(source)?;
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("time must be nonnegative, got {t}")));
    }
    if opts.n_paths == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    let walsh = Walsh { sc, absorbing: d.policy == BoundaryPolicy::Absorbing };
    let n_steps = (t / opts.dt).ceil() as u64;
    let dt = if n_steps == 0 { 0.0 } else { t / n_steps as f64 };
    let empty = EmpiricalMeasure::empty(&d.mass);
    (0..opts.n_paths)
        .into_par_iter()
        .try_fold(
            || empty.clone(),
            |mut acc, w| {
                let mut rng = walker_rng(opts.seed, w);
                let mut st = walsh.start(source, &mut rng);
                acc.total += 1;
                for _ in 0..n_steps {
                    match walsh.step(st, dt, &mut rng)? {
                        Step::Moved(next) => st = next,
                        Step::Killed => {
                            acc.killed += 1;
                            return Ok(acc);
                        }
                    }
                }
                match bin(d, st) {
                    Some(k) => acc.counts[k] += 1,
                    None => acc.killed += 1,
                }
                Ok(acc)
            },
        )
        .try_reduce(|| empty.clone(), |a, b| Ok(a.merge(b)))
}

/// Probability that one Walsh step from vertex `v` lands on each incident edge (for diagnostics).
pub fn walsh_weights(sc: &StripComplex, v: usize) -> Vec<(usize, f64)> {
    let g = &sc.graph;
    let w: Vec<f64> = g.adjacency[v].iter().map(|&e| sc.coeffs[e].a.eval(g.edges[e].coordinate_of(v))).collect();
    let total: f64 = w.iter().sum();
    g.adjacency[v].iter().zip(w).map(|(&e, w)| (e, w / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid};
    use crate::strip_complex::build_treebolic;

    #[test]
    fn vertex_crossing_follows_flux_weights() {
        // p = 2, β = 1.5: from the vertex the walker goes down with probability 1/(1 + 2β).
        let beta = 1.5;
        let sc = build_treebolic(2, 2.0, 0.0, beta, -1, 1, 1.0).unwrap();
        let grid = build_grid(&sc, 5, 3).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap();
        let v = 1;
        let down = sc.graph.tree.as_ref().unwrap().parent_edge[v].unwrap();
        let n = 40_000;
        let walsh = Walsh { sc: &d.complex, absorbing: false };
        let mut hits = 0;
        for w in 0..n {
            let mut rng = walker_rng(3, w);
            let st = walsh.start(PointOnComplex::Manifold { vertex: v, x: 0.0 }, &mut rng);
            hits += (st.edge == down) as u64;
        }
        let p = hits as f64 / n as f64;
        let want = 1.0 / (1.0 + 2.0 * beta);
        assert!((p - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt(), "p = {p}");
        let w = walsh_weights(&sc, v);
        assert!((w.iter().find(|(e, _)| *e == down).unwrap().1 - want).abs() < 1e-12);
    }

    #[test]
    fn interior_increments_have_the_right_moments() {
        // α = 0: drift vanishes and Var(Δs) = 2σ²Δt inside a strip.
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let walsh = Walsh { sc: &sc, absorbing: false };
        let e = 1;
        let s0 = 0.5 * sc.graph.edges[e].length;
        let sigma = sc.graph.edges[e].level.map(|k| 2f64.powi(k - 1)).unwrap() + s0;
        let dt = 1e-4;
        let n = 50_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for w in 0..n {
            let mut rng = walker_rng(8, w);
            let Step::Moved(st) = walsh.step(State { edge: e, s: s0, x: 0.0 }, dt, &mut rng).unwrap() else { panic!() };
            let ds = st.s - s0;
            m1 += ds;
            m2 += ds * ds;
        }
        let var_expected = 2.0 * sigma * sigma * dt;
        assert!((walsh.diffusivity(e, s0) - sigma * sigma).abs() < 1e-12);
        let mean = m1 / n as f64;
        let var = m2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * (var_expected / n as f64).sqrt());
        assert!((var / var_expected - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn huge_steps_are_rejected() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let grid = build_grid(&sc, 5, 3).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap();
        let src = PointOnComplex::Manifold { vertex: 0, x: 0.0 };
        let r = sample_sde(&d, src, 10.0, SdeOptions { dt: 5.0, n_paths: 200, seed: 1 });
        assert!(matches!(r, Err(Error::StepSize(_))));
    }

    #[test]
    fn fiber_folding_stays_inside() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let walsh = Walsh { sc: &sc, absorbing: false };
        for x in [-7.3, -1.01, 0.2, 0.99, 3.5, 12.0] {
            let y = walsh.fold_fiber(x);
            assert!((-1.0..=1.0).contains(&y), "{x} -> {y}");
        }
        assert!((walsh.fold_fiber(1.2) - 0.8).abs() < 1e-12);
    }
}
