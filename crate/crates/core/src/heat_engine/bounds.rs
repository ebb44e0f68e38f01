//! Gaussian upper-bound fit and one-sided derivative probes.

use serde::Serialize;

use super::HeatKernelSlice;
use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::strip_complex::{DistanceGrid, Resolution};

/// Grid distances from the point of DOF `source` to every DOF.
pub fn node_distances(d: &Discretization, source: usize, res: Resolution) -> Result<Vec<f64>> {
    let grid = DistanceGrid::new(&d.complex, res)?;
    let from = d.grid.point(d.dofs[source]);
    let dist = grid.distances_from(from)?;
    Ok(d.dofs.iter().map(|&n| {
        let p = d.grid.point(n);
        if p == from { 0.0 } else { grid.distance_to(&dist, from, p) }
    }).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussianReport {
    pub epsilon: f64,
    /// `sup_ζ log h(t, ξ₀, ζ) + d(ξ₀, ζ)² / (4(1+ε)t)` over resolved nodes.
    pub c_star: f64,
    pub argmax: usize,
    pub considered: usize,
    /// Nodes whose value lies below `1e-12 · max h` (not resolved by the solver).
    pub below_floor: usize,
    pub non_finite: usize,
}

impl GaussianReport {
    /// `exp(C*)`, the fitted constant in front of the Gaussian.
    pub fn constant(&self) -> f64 {
        self.c_star.exp()
    }
}

pub fn gaussian_bound_check(slice: &HeatKernelSlice, distances: &[f64], epsilon: f64) -> Result<GaussianReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let h = &slice.values.values;
    if distances.len() != h.len() {
        return Err(Error::Shape { expected: h.len(), actual: distances.len() });
    }
    let floor = 1e-12 * h.iter().cloned().fold(0.0, f64::max);
    let mut report = GaussianReport { epsilon, c_star: f64::NEG_INFINITY, argmax: 0, considered: 0, below_floor: 0, non_finite: 0 };
    for (j, (&v, &dist)) in h.iter().zip(distances).enumerate() {
        if !v.is_finite() || !dist.is_finite() {
            report.non_finite += 1;
            continue;
        }
        if v <= floor {
            report.below_floor += 1;
            continue;
        }
        report.considered += 1;
        let c = v.ln() + dist * dist / (4.0 * (1.0 + epsilon) * slice.t);
        if c > report.c_star {
            report.c_star = c;
            report.argmax = j;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    pub vertex: usize,
    pub edges: Vec<usize>,
    pub sample_x: Vec<f64>,
    /// Finest-level derivative along each edge's own direction, `[edge][x]`.
    pub s_limits: Vec<Vec<f64>>,
    /// Largest change of any s-derivative between the two finest levels.
    pub cauchy_tol: f64,
    /// Largest gap between the s-limits of two incident edges.
    pub s_jump: f64,
    /// Largest gap between extrapolated one-sided x-derivatives at the finest level.
    pub x_mismatch: f64,
    pub x_cauchy_tol: f64,
    /// Cauchy differences per refinement step (s-derivatives).
    pub increments: Vec<f64>,
}

fn index_of(xs: &[f64], x: f64) -> Result<usize> {
    xs.iter()
        .position(|&v| (v - x).abs() < 1e-12 * (1.0 + x.abs()))
        .ok_or_else(|| Error::Configuration(format!("fiber position {x} is not a node of every grid")))
}

fn derivatives(d: &Discretization, f: &[f64], vertex: usize, xs: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let g = &d.complex.graph;
    let grid = &d.grid;
    let mut ds = Vec::new();
    let mut dx = Vec::new();
    for &e in &g.adjacency[vertex] {
        let edge = &g.edges[e];
        let sign = if edge.tail == vertex { 1.0 } else { -1.0 };
        let from_tail = edge.tail == vertex;
        let layer = |k: usize| if from_tail { k } else { grid.nodes_per_edge - 1 - k };
        let s = &grid.s_nodes[e];
        let (h1, h2) = ((s[layer(1)] - s[layer(0)]).abs(), (s[layer(2)] - s[layer(0)]).abs());
        let mut row_s = Vec::new();
        let mut row_x = Vec::new();
        for &x in xs {
            let j = index_of(&grid.xs, x)?;
            if j == 0 || j + 1 >= grid.fiber_nodes {
                return Err(Error::Configuration("x-derivatives need interior fiber positions".into()));
            }
            row_s.push(sign * super::one_sided_derivative(d, f, e, vertex, j));
            let gx = |i: usize| {
                let a = f[grid.node(e, layer(i), j + 1)];
                let b = f[grid.node(e, layer(i), j - 1)];
                (a - b) / (grid.xs[j + 1] - grid.xs[j - 1])
            };
            let (g1, g2) = (gx(1), gx(2));
            row_x.push(g1 + (g1 - g2) * h1 / (h2 - h1));
        }
        ds.push(row_s);
        dx.push(row_x);
    }
    Ok((ds, dx))
}

/// Compares one-sided derivatives at `M_vertex` across a refinement ladder.
///
/// `fields[l]` holds grid-node values on `ladder[l]`; `sample_x` must be
/// interior fiber nodes of every grid.
pub fn smoothness_probe(ladder: &[Discretization], fields: &[Vec<f64>], vertex: usize, sample_x: &[f64]) -> Result<SmoothnessReport> {
    if ladder.len() < 3 || fields.len() != ladder.len() {
        return Err(Error::Parameter("smoothness probe needs a ladder of at least 3 discretizations with one field each".into()));
    }
    let g = &ladder[0].complex.graph;
    if vertex >= g.vertices.len() || g.vertices[vertex].boundary {
        return Err(Error::Domain(format!("vertex {vertex} is not an interior vertex")));
    }
    let mut all = Vec::new();
    for (d, f) in ladder.iter().zip(fields) {
        if f.len() != d.grid.len() {
            return Err(Error::Shape { expected: d.grid.len(), actual: f.len() });
        }
        all.push(derivatives(d, f, vertex, sample_x)?);
    }
    let diff = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
        a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let increments: Vec<f64> = all.windows(2).map(|w| diff(&w[0].0, &w[1].0)).collect();
    let l = all.len() - 1;
    let (s_fine, x_fine) = &all[l];
    let pair_gap = |rows: &Vec<Vec<f64>>| {
        let mut gap = 0.0f64;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                for (u, v) in rows[a].iter().zip(&rows[b]) {
                    gap = gap.max((u - v).abs());
                }
            }
        }
        gap
    };
    Ok(SmoothnessReport {
        vertex,
        edges: g.adjacency[vertex].clone(),
        sample_x: sample_x.to_vec(),
        s_limits: s_fine.clone(),
        cauchy_tol: increments[l - 1],
        s_jump: pair_gap(s_fine),
        x_mismatch: pair_gap(x_fine),
        x_cauchy_tol: diff(&all[l - 1].1, x_fine),
        increments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat_engine::{Field, HeatKernelSlice};

    #[test]
    fn uniform_kernel_peaks_at_the_farthest_node() {
        let slice = HeatKernelSlice { t: 2.0, source: 0, values: Field::new(vec![0.25; 4]) };
        let dist = [0.0, 1.0, 2.0, 3.0];
        let r = gaussian_bound_check(&slice, &dist, 0.5).unwrap();
        assert_eq!(r.argmax, 3);
        assert!((r.c_star - (0.25f64.ln() + 9.0 / (4.0 * 1.5 * 2.0))).abs() < 1e-14);
        let r2 = gaussian_bound_check(&slice, &dist, 0.25).unwrap();
        assert!(r2.c_star > r.c_star);
    }
}
