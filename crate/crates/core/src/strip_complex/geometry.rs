//! Measure, grid distance and ball volumes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{Fiber, PointOnComplex, StripComplex};
use crate::error::{Error, Result};
use crate::metric_graph::Profile;

/// Rectangle `[s0, s1] × [x0, x1]` inside the strip of `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub edge: usize,
    pub s0: f64,
    pub s1: f64,
    pub x0: f64,
    pub x1: f64,
}

/// `μ` of a union of non-overlapping cells, integrating `m_e` exactly in `s`.
pub fn measure(sc: &StripComplex, region: &[Cell]) -> f64 {
    region
        .iter()
        .map(|c| {
            let width = if sc.fiber.dimension() == 0 { 1.0 } else { (c.x1 - c.x0).abs() };
            sc.coeffs[c.edge].m.integral(c.s0, c.s1) * width
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// s-nodes per edge including both endpoints.
    pub nodes_per_edge: usize,
    pub fiber_nodes: usize,
    /// Largest index offset of the straight-segment stencil.
    pub stencil: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { nodes_per_edge: 17, fiber_nodes: 17, stencil: 3 }
    }
}

impl Resolution {
    /// Doubles the number of intervals in both directions (nested grids).
    pub fn refined(&self) -> Resolution {
        Resolution {
            nodes_per_edge: 2 * self.nodes_per_edge - 1,
            fiber_nodes: if self.fiber_nodes > 1 { 2 * self.fiber_nodes - 1 } else { 1 },
            stencil: self.stencil,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform tensor grid on every strip, joined by straight segments whose
/// Riemannian lengths are integrated exactly.
pub struct DistanceGrid<'a> {
    sc: &'a StripComplex,
    res: Resolution,
    xs: Vec<f64>,
    root_phi: Vec<Profile>,
    edge_base: Vec<usize>,
    n_nodes: usize,
    offsets: Vec<(i64, i64)>,
}

impl<'a> DistanceGrid<'a> {
    pub fn new(sc: &'a StripComplex, res: Resolution) -> Result<Self> {
        if res.nodes_per_edge < 2 || res.fiber_nodes < 1 || res.stencil < 1 {
            return Err(Error::Parameter(format!("invalid distance resolution {res:?}")));
        }
        let m = if sc.fiber.dimension() == 0 { 1 } else { res.fiber_nodes };
        let xs = fiber_nodes(&sc.fiber, m);
        let nv = sc.graph.vertices.len();
        let mut edge_base = Vec::with_capacity(sc.graph.edges.len());
        let mut next = nv * m;
        for _ in &sc.graph.edges {
            edge_base.push(next);
            next += (res.nodes_per_edge - 2) * m;
        }
        let k = res.stencil as i64;
        let mut offsets = Vec::new();
        for di in -k..=k {
            for dj in -k..=k {
                if (di, dj) != (0, 0) && gcd(di.unsigned_abs(), dj.unsigned_abs()) == 1 {
                    offsets.push((di, dj));
                }
            }
        }
        if m == 1 {
            offsets.retain(|&(_, dj)| dj == 0);
        }
        Ok(DistanceGrid {
            sc,
            res: Resolution { fiber_nodes: m, ..res },
            root_phi: sc.coeffs.iter().map(|c| c.phi.powf(0.5)).collect(),
            xs,
            edge_base,
            n_nodes: next,
            offsets,
        })
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.n_nodes == 0
    }

    fn m(&self) -> usize {
        self.res.fiber_nodes
    }

    fn s_of(&self, edge: usize, i: usize) -> f64 {
        self.sc.graph.edges[edge].length * i as f64 / (self.res.nodes_per_edge - 1) as f64
    }

    fn node(&self, edge: usize, i: usize, j: usize) -> usize {
        let n = self.res.nodes_per_edge;
        let e = &self.sc.graph.edges[edge];
        if i == 0 {
            e.tail * self.m() + j
        } else if i == n - 1 {
            e.head * self.m() + j
        } else {
            self.edge_base[edge] + (i - 1) * self.m() + j
        }
    }

    /// Riemannian length of the straight segment `(s0, x0) → (s1, x0 + dx)` in one strip.
    fn segment(&self, edge: usize, s0: f64, s1: f64, dx: f64) -> f64 {
        let ds = (s1 - s0).abs();
        if ds <= 1e-15 * self.sc.graph.edges[edge].length {
            return self.root_phi[edge].eval(0.5 * (s0 + s1)) * dx.abs();
        }
        ds.hypot(dx) / ds * self.root_phi[edge].integral(s0.min(s1), s0.max(s1))
    }

    fn shift(&self, j: usize, dj: i64) -> Option<usize> {
        let m = self.m() as i64;
        let t = j as i64 + dj;
        match self.sc.fiber {
            Fiber::Circle { .. } => Some(t.rem_euclid(m) as usize),
            _ if (0..m).contains(&t) => Some(t as usize),
            _ => None,
        }
    }

    fn strips_of(&self, p: PointOnComplex) -> Vec<(usize, f64)> {
        match p {
            PointOnComplex::Strip { edge, s, .. } => vec![(edge, s)],
            PointOnComplex::Manifold { vertex, .. } => self.sc.graph.adjacency[vertex]
                .iter()
                .map(|&e| (e, self.sc.graph.edges[e].coordinate_of(vertex)))
                .collect(),
        }
    }

    /// Straight-segment distances from `p` to every node of the strips containing it.
    fn seeds(&self, p: PointOnComplex) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (edge, s) in self.strips_of(p) {
            for i in 0..self.res.nodes_per_edge {
                for (j, &x) in self.xs.iter().enumerate() {
                    let dx = self.sc.fiber.displacement(p.x(), x);
                    out.push((self.node(edge, i, j), self.segment(edge, s, self.s_of(edge, i), dx)));
                }
            }
        }
        out
    }

    /// Grid-path distances from `p` to all nodes.
    pub fn distances_from(&self, p: PointOnComplex) -> Result<Vec<f64>> {
        self.sc.check_point(p)?;
        let mut dist = vec![f64::INFINITY; self.n_nodes];
        let mut heap = BinaryHeap::new();
        for (v, d) in self.seeds(p) {
            if d < dist[v] {
                dist[v] = d;
                heap.push(Entry(d, v));
            }
        }
        let locate = self.locator();
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(edge, i, j) in &locate[v] {
                let s0 = self.s_of(edge, i);
                for &(di, dj) in &self.offsets {
                    let ti = i as i64 + di;
                    if ti < 0 || ti >= self.res.nodes_per_edge as i64 {
                        continue;
                    }
                    let Some(tj) = self.shift(j, dj) else { continue };
                    let ti = ti as usize;
                    let w = self.node(edge, ti, tj);
                    let dx = self.sc.fiber.displacement(self.xs[j], self.xs[tj]);
                    let nd = d + self.segment(edge, s0, self.s_of(edge, ti), dx);
                    if nd < dist[w] {
                        dist[w] = nd;
                        heap.push(Entry(nd, w));
                    }
                }
            }
        }
        Ok(dist)
    }

    /// Strip-local positions `(edge, i, j)` of each node.
    fn locator(&self) -> Vec<Vec<(usize, usize, usize)>> {
        let mut loc = vec![Vec::new(); self.n_nodes];
        for edge in 0..self.sc.graph.edges.len() {
            for i in 0..self.res.nodes_per_edge {
                for j in 0..self.m() {
                    loc[self.node(edge, i, j)].push((edge, i, j));
                }
            }
        }
        loc
    }

    /// Distance from the source of `dist` to `q`, closing with straight segments.
    pub fn distance_to(&self, dist: &[f64], from: PointOnComplex, q: PointOnComplex) -> f64 {
        let mut best = f64::INFINITY;
        for (node, d) in self.seeds(q) {
            best = best.min(dist[node] + d);
        }
        for (e1, s1) in self.strips_of(from) {
            for (e2, s2) in self.strips_of(q) {
                if e1 == e2 {
                    best = best.min(self.segment(e1, s1, s2, self.sc.fiber.displacement(from.x(), q.x())));
                }
            }
        }
        best
    }

    /// Cells `[s_i, s_{i+1}] × fiber cell` with their measure and center distance.
    fn cells(&self, dist: &[f64], from: PointOnComplex) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let fcells = fiber_cells(&self.sc.fiber, &self.xs);
        let from_strips = self.strips_of(from);
        for edge in 0..self.sc.graph.edges.len() {
            for i in 0..self.res.nodes_per_edge - 1 {
                let (s0, s1) = (self.s_of(edge, i), self.s_of(edge, i + 1));
                let sc_mid = 0.5 * (s0 + s1);
                let mass_s = self.sc.coeffs[edge].m.integral(s0, s1);
                for &(x_lo, x_hi, ref corners) in &fcells {
                    let xc = 0.5 * (x_lo + x_hi);
                    let mut d = f64::INFINITY;
                    for &ii in &[i, i + 1] {
                        for &j in corners {
                            let node = self.node(edge, ii, j);
                            let dx = self.sc.fiber.displacement(self.xs[j], xc);
                            d = d.min(dist[node] + self.segment(edge, self.s_of(edge, ii), sc_mid, dx));
                        }
                    }
                    for &(e1, s) in &from_strips {
                        if e1 == edge {
                            d = d.min(self.segment(edge, s, sc_mid, self.sc.fiber.displacement(from.x(), xc)));
                        }
                    }
                    let width = if self.sc.fiber.dimension() == 0 { 1.0 } else { x_hi - x_lo };
                    out.push((d, mass_s * width));
                }
            }
        }
        out
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn fiber_nodes(fiber: &Fiber, m: usize) -> Vec<f64> {
    match *fiber {
        Fiber::Point => vec![0.0],
        Fiber::Interval { .. } if m == 1 => vec![0.0],
        Fiber::Interval { length } => (0..m).map(|j| -length / 2.0 + length * j as f64 / (m - 1) as f64).collect(),
        Fiber::Circle { length } => (0..m).map(|j| -length / 2.0 + length * j as f64 / m as f64).collect(),
    }
}

/// Fiber cells as `(x_lo, x_hi, corner node indices)`.
fn fiber_cells(fiber: &Fiber, xs: &[f64]) -> Vec<(f64, f64, Vec<usize>)> {
    let m = xs.len();
    match *fiber {
        Fiber::Point => vec![(0.0, 0.0, vec![0])],
        Fiber::Interval { length } if m == 1 => vec![(-length / 2.0, length / 2.0, vec![0])],
        Fiber::Interval { .. } => (0..m - 1).map(|j| (xs[j], xs[j + 1], vec![j, j + 1])).collect(),
        Fiber::Circle { length } => {
            (0..m).map(|j| (xs[j], xs[j] + length / m as f64, vec![j, (j + 1) % m])).collect()
        }
    }
}

/// Upper approximation of the intrinsic distance `ρ(ξ, ζ)`.
pub fn distance(sc: &StripComplex, xi: PointOnComplex, zeta: PointOnComplex, res: Resolution) -> Result<f64> {
    sc.check_point(zeta)?;
    if xi == zeta {
        return Ok(0.0);
    }
    let grid = DistanceGrid::new(sc, res)?;
    let dist = grid.distances_from(xi)?;
    Ok(grid.distance_to(&dist, xi, zeta))
}

/// `μ` of the grid cells whose centers lie within distance `r` of `ξ`.
pub fn ball_volume(sc: &StripComplex, xi: PointOnComplex, r: f64, res: Resolution) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {r}")));
    }
    let grid = DistanceGrid::new(sc, res)?;
    let dist = grid.distances_from(xi)?;
    Ok(grid.cells(&dist, xi).into_iter().filter(|(d, _)| *d <= r).map(|(_, m)| m).sum())
}

/// Ball volumes for several radii from one distance sweep.
pub fn ball_volumes(sc: &StripComplex, xi: PointOnComplex, radii: &[f64], res: Resolution) -> Result<Vec<f64>> {
    let grid = DistanceGrid::new(sc, res)?;
    let dist = grid.distances_from(xi)?;
    let cells = grid.cells(&dist, xi);
    Ok(radii.iter().map(|&r| cells.iter().filter(|(d, _)| *d <= r).map(|(_, m)| m).sum()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::MetricGraph;
    use crate::strip_complex::build_treebolic;

    #[test]
    fn measure_of_hyperbolic_strip() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, 0, 2, 1.0).unwrap();
        let e = sc.graph.edges.iter().find(|e| e.level == Some(1)).unwrap().id;
        let cell = Cell { edge: e, s0: 0.0, s1: 1.0, x0: 0.0, x1: 1.0 };
        assert!((measure(&sc, &[cell]) - 0.5).abs() < 1e-14);
        let wide = Cell { x0: -1.0, ..cell };
        assert!((measure(&sc, &[wide]) - 1.0).abs() < 1e-14);
        assert_eq!(measure(&sc, &[]), 0.0);
    }

    #[test]
    fn vertical_hyperbolic_distance() {
        let sc = build_treebolic(1, 2.0, 0.0, 1.0, 0, 2, 1.0).unwrap();
        let e = sc.graph.edges.iter().find(|e| e.level == Some(1)).unwrap().id;
        let a = PointOnComplex::Strip { edge: e, s: 0.0, x: 0.0 };
        let b = PointOnComplex::Strip { edge: e, s: 1.0, x: 0.0 };
        let d = distance(&sc, a, b, Resolution::default()).unwrap();
        assert!((d - 2f64.ln()).abs() < 0.02 * 2f64.ln());
        assert_eq!(distance(&sc, a, a, Resolution::default()).unwrap(), 0.0);
    }

    #[test]
    fn cross_strip_distance_passes_the_manifold() {
        let g = MetricGraph::star(&[1.0, 1.0, 1.0]).unwrap();
        let sc = StripComplex::flat(g, Fiber::Interval { length: 1.0 }).unwrap();
        let a = PointOnComplex::Strip { edge: 0, s: 0.5, x: 0.2 };
        let b = PointOnComplex::Strip { edge: 1, s: 0.25, x: -0.3 };
        let d = distance(&sc, a, b, Resolution::default()).unwrap();
        // the true geodesic unfolds to a straight segment of length hypot(0.75, 0.5)
        assert!(d >= 0.75f64.hypot(0.5) - 1e-12);
        assert!(d <= 0.75f64.hypot(0.5) * 1.01);
    }

    #[test]
    fn distance_is_nonincreasing_under_refinement() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let a = PointOnComplex::Strip { edge: 0, s: 0.1, x: -0.7 };
        let b = PointOnComplex::Strip { edge: 5, s: 0.6, x: 0.45 };
        let mut res = Resolution { nodes_per_edge: 5, fiber_nodes: 5, stencil: 2 };
        let mut last = f64::INFINITY;
        for _ in 0..3 {
            let d = distance(&sc, a, b, res).unwrap();
            let back = distance(&sc, b, a, res).unwrap();
            assert!((d - back).abs() < 1e-12 * d);
            assert!(d <= last + 1e-12);
            last = d;
            res = res.refined();
        }
    }

    #[test]
    fn ball_volume_grows_quadratically_in_flat_interior() {
        let g = MetricGraph::path(&[2.0]).unwrap();
        let sc = StripComplex::flat(g, Fiber::Interval { length: 2.0 }).unwrap();
        let xi = PointOnComplex::Strip { edge: 0, s: 1.0, x: 0.0 };
        let res = Resolution { nodes_per_edge: 161, fiber_nodes: 161, stencil: 3 };
        let v = ball_volumes(&sc, xi, &[1e-4, 0.3, 0.6], res).unwrap();
        assert_eq!(v[0], 0.0);
        let exponent = (v[2] / v[1]).ln() / 2f64.ln();
        assert!((1.8..=2.2).contains(&exponent), "exponent {exponent}");
        assert!(v[1] <= v[2]);
    }
}
