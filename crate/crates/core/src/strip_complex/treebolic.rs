use serde::{Deserialize, Serialize};

use super::{Fiber, PointOnComplex, StripComplex};
use crate::error::{Error, Result};
use crate::metric_graph::{build_tree, EdgeCoefficients, MetricGraph, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreebolicParams {
    pub p: usize,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Horizontal half-width `R` of the truncated fiber.
    pub half_width: f64,
    pub k_min: i32,
    pub k_max: i32,
}

/// Level-`k` coefficients in the height coordinate: `a = β^k σ^α`, `m = β^k σ^{α−2}`.
pub(crate) fn level_coefficients(q: f64, alpha: f64, beta: f64, k: i32, n: u8) -> Result<EdgeCoefficients> {
    let offset = q.powi(k - 1);
    let weight = beta.powi(k);
    let a = Profile::power(weight, alpha, offset);
    let m = Profile::power(weight, alpha - 2.0, offset);
    EdgeCoefficients::from_a_m(a, m, n)
}

fn check(p: usize, q: f64, alpha: f64, beta: f64, half_width: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
    }
    if !alpha.is_finite() {
        return Err(Error::Parameter(format!("alpha must be finite, got {alpha}")));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::Parameter(format!("half-width R must be positive, got {half_width}")));
    }
    if p < 1 || !(q > 1.0) {
        return Err(Error::Parameter(format!("need p >= 1 and q > 1, got p={p}, q={q}")));
    }
    Ok(())
}

/// Truncated treebolic space `HT(p, q)` with measure weights `(α, β)`.
///
/// The fiber is the reflecting interval `[-R, R]`; on a level-`k` edge the
/// geometry is `φ = σ⁻²` and the measure profile `ψ = β^k σ^α`, with `σ` the height.
pub fn build_treebolic(
    p: usize,
    q: f64,
    alpha: f64,
    beta: f64,
    k_min: i32,
    k_max: i32,
    half_width: f64,
) -> Result<StripComplex> {
    check(p, q, alpha, beta, half_width)?;
    let graph = build_tree(p, q, k_min, k_max)?;
    let fiber = Fiber::Interval { length: 2.0 * half_width };
    let params = TreebolicParams { p, q, alpha, beta, half_width, k_min, k_max };
    with_level_coefficients(graph, fiber, params)
}

/// The tree `T_{p,q}` alone (point fiber) carrying the same reduced densities.
pub fn build_tree_complex(p: usize, q: f64, alpha: f64, beta: f64, k_min: i32, k_max: i32) -> Result<StripComplex> {
    check(p, q, alpha, beta, 1.0)?;
    let graph = build_tree(p, q, k_min, k_max)?;
    let params = TreebolicParams { p, q, alpha, beta, half_width: 0.0, k_min, k_max };
    with_level_coefficients(graph, Fiber::Point, params)
}

pub(crate) fn with_level_coefficients(graph: MetricGraph, fiber: Fiber, params: TreebolicParams) -> Result<StripComplex> {
    let n = fiber.dimension();
    let coeffs = graph
        .edges
        .iter()
        .map(|e| level_coefficients(params.q, params.alpha, params.beta, e.level.expect("tree edge"), n))
        .collect::<Result<Vec<_>>>()?;
    let mut sc = StripComplex::new(graph, fiber, coeffs)?;
    sc.treebolic = Some(params);
    Ok(sc)
}

impl StripComplex {
    /// Height `σ = y` of a point on a tree-built complex.
    pub fn height(&self, p: PointOnComplex) -> Result<f64> {
        let tree = self.graph.tree.as_ref().ok_or_else(|| Error::Domain("complex is not tree-built".into()))?;
        self.check_point(p)?;
        Ok(match p {
            PointOnComplex::Strip { edge, s, .. } => {
                let (lo, _) = tree.level_span(self.graph.edges[edge].level.expect("tree edge"));
                lo + s
            }
            PointOnComplex::Manifold { vertex, .. } => tree.q.powi(self.graph.vertices[vertex].level.expect("tree vertex")),
        })
    }

    /// `(x, y)` in the upper half-plane component of a treebolic point.
    pub fn to_half_plane(&self, p: PointOnComplex) -> Result<(f64, f64)> {
        Ok((p.x(), self.height(p)?))
    }

    /// Inverse of [`StripComplex::to_half_plane`] on the strip of `edge`.
    pub fn from_half_plane(&self, edge: usize, x: f64, y: f64) -> Result<PointOnComplex> {
        let tree = self.graph.tree.as_ref().ok_or_else(|| Error::Domain("complex is not tree-built".into()))?;
        let e = self.graph.edges.get(edge).ok_or_else(|| Error::Domain(format!("unknown edge {edge}")))?;
        let (lo, hi) = tree.level_span(e.level.expect("tree edge"));
        if y < lo * (1.0 - 1e-14) || y > hi * (1.0 + 1e-14) {
            return Err(Error::Domain(format!("height {y} outside strip [{lo}, {hi}] of edge {edge}")));
        }
        let p = PointOnComplex::Strip { edge, s: (y - lo).clamp(0.0, e.length), x };
        self.check_point(p)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hyperbolic_measure_on_level_one() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, 0, 2, 1.0).unwrap();
        let e = sc.graph.edges.iter().find(|e| e.level == Some(1)).unwrap();
        let c = &sc.coeffs[e.id];
        for s in [0.0, 0.3, 1.0] {
            let y = 1.0 + s;
            assert_relative_eq!(c.m.eval(s), y.powi(-2), max_relative = 1e-14);
            assert_relative_eq!(c.a.eval(s), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn alpha_two_gives_lebesgue_up_to_level_weight() {
        let sc = build_treebolic(2, 2.0, 2.0, 0.5, -1, 2, 1.0).unwrap();
        for e in &sc.graph.edges {
            let k = e.level.unwrap();
            for s in [0.0, e.length / 2.0, e.length] {
                assert_relative_eq!(sc.coeffs[e.id].m.eval(s), 0.5f64.powi(k), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn sliced_plane_has_unit_energy_density() {
        let sc = build_treebolic(1, 3.0, 0.0, 1.0, -2, 2, 1.0).unwrap();
        for (e, c) in sc.graph.edges.iter().zip(&sc.coeffs) {
            assert_eq!(c.a.eval(e.length / 3.0), 1.0);
        }
    }

    #[test]
    fn tree_complex_keeps_reduced_densities() {
        let tc = build_tree_complex(2, 2.0, 1.0, 0.5, 0, 2).unwrap();
        let sc = build_treebolic(2, 2.0, 1.0, 0.5, 0, 2, 1.0).unwrap();
        for e in 0..tc.graph.edges.len() {
            assert_relative_eq!(tc.coeffs[e].a.eval(0.4), sc.coeffs[e].a.eval(0.4), max_relative = 1e-14);
            assert_relative_eq!(tc.coeffs[e].m.eval(0.4), sc.coeffs[e].m.eval(0.4), max_relative = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn half_plane_round_trip(edge in 0usize..14, t in 0.0f64..=1.0, u in -1.0f64..=1.0) {
            let sc = build_treebolic(2, 2.0, 1.0, 0.5, -1, 2, 1.5).unwrap();
            let e = &sc.graph.edges[edge];
            let p = PointOnComplex::Strip { edge, s: t * e.length, x: 1.5 * u };
            let (x, y) = sc.to_half_plane(p).unwrap();
            let k = e.level.unwrap();
            prop_assert!(y >= 2f64.powi(k - 1) && y <= 2f64.powi(k));
            let back = sc.from_half_plane(edge, x, y).unwrap();
            match back {
                PointOnComplex::Strip { edge: e2, s, x: x2 } => {
                    prop_assert_eq!(e2, edge);
                    prop_assert!((s - t * e.length).abs() < 1e-12);
                    prop_assert_eq!(x2, x);
                }
                _ => prop_assert!(false),
            }
        }
    }
}
