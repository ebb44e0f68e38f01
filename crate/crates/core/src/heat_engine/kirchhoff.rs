use serde::Serialize;

use crate::assembly::{Discretization, Grid};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct KirchhoffReport {
    pub vertex: usize,
    /// `∑_e a_e(v) D_e f(v, x_j)` per fiber node.
    pub per_x: Vec<f64>,
    pub max_norm: f64,
}

/// Layer index counted from the `v` end of `edge`.
fn layer(grid: &Grid, edge_tail: bool, k: usize) -> usize {
    if edge_tail {
        k
    } else {
        grid.nodes_per_edge - 1 - k
    }
}

/// Second-order one-sided derivative of node values `f` at `v`, taken along
/// `edge` in the direction pointing away from `v`.
pub fn one_sided_derivative(d: &Discretization, f: &[f64], edge: usize, v: usize, j: usize) -> f64 {
    let grid = &d.grid;
    let e = &d.complex.graph.edges[edge];
    let from_tail = e.tail == v;
    let s = &grid.s_nodes[edge];
    let idx: Vec<usize> = (0..3).map(|k| layer(grid, from_tail, k)).collect();
    let h1 = (s[idx[1]] - s[idx[0]]).abs();
    let h2 = (s[idx[2]] - s[idx[0]]).abs();
    let f0 = f[grid.node(edge, idx[0], j)];
    let f1 = f[grid.node(edge, idx[1], j)];
    let f2 = f[grid.node(edge, idx[2], j)];
    (f1 - f0) * h2 / (h1 * (h2 - h1)) - (f2 - f0) * h1 / (h2 * (h2 - h1))
}

/// Weighted flux balance at the bifurcation manifold `M_v` for node values `f`.
pub fn kirchhoff_residual(d: &Discretization, f: &[f64], v: usize) -> Result<KirchhoffReport> {
    let g = &d.complex.graph;
    if v >= g.vertices.len() {
        return Err(Error::Domain(format!("unknown vertex {v}")));
    }
    if g.vertices[v].boundary {
        return Err(Error::Domain(format!("vertex {v} lies on the truncation boundary")));
    }
    if f.len() != d.grid.len() {
        return Err(Error::Shape { expected: d.grid.len(), actual: f.len() });
    }
    if d.grid.nodes_per_edge < 3 {
        return Err(Error::Parameter("one-sided derivatives need at least 3 nodes per edge".into()));
    }
    let per_x: Vec<f64> = (0..d.grid.fiber_nodes)
        .map(|j| {
            g.adjacency[v]
                .iter()
                .map(|&e| d.complex.coeffs[e].a.eval(g.edges[e].coordinate_of(v)) * one_sided_derivative(d, f, e, v, j))
                .sum()
        })
        .collect();
    let max_norm = per_x.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(KirchhoffReport { vertex: v, per_x, max_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid, BoundaryPolicy};
    use crate::strip_complex::build_treebolic;

    #[test]
    fn constants_have_zero_residual() {
        let sc = build_treebolic(2, 2.0, 0.0, 0.5, -1, 1, 1.0).unwrap();
        let grid = build_grid(&sc, 5, 3).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap();
        let f = vec![3.0; grid.len()];
        let v = sc.graph.vertices.iter().find(|v| v.level == Some(0)).unwrap().id;
        let r = kirchhoff_residual(&d, &f, v).unwrap();
        assert_eq!(r.max_norm, 0.0);
        assert!(kirchhoff_residual(&d, &f, 0).is_err());
    }

    #[test]
    fn one_sided_stencil_is_exact_for_quadratics() {
        let sc = build_treebolic(1, 2.0, 0.0, 1.0, 0, 2, 1.0).unwrap();
        let grid = build_grid(&sc, 6, 1).unwrap();
        let d = assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|n| {
            let y = sc.height(grid.point(n)).unwrap();
            y * y - 3.0 * y
        }).collect();
        // vertex 1 at height 2: derivative into the upper edge is 2y − 3 = 1, into the lower edge −1
        let up = one_sided_derivative(&d, &f, 1, 1, 0);
        let down = one_sided_derivative(&d, &f, 0, 1, 0);
        assert!((up - 1.0).abs() < 1e-12 && (down + 1.0).abs() < 1e-12);
    }
}
