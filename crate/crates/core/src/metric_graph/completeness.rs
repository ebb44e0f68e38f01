use serde::Serialize;

use super::{EdgeCoefficients, MetricGraph, Profile, ProfileKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RayVerdict {
    /// `∑ ∫ √φ` diverges along the extension.
    Complete,
    Incomplete,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayReport {
    pub vertex: usize,
    pub edge: usize,
    /// Length ratio between consecutive extension edges, outward.
    pub ratio: f64,
    /// `∫ √φ` over the first extension edges.
    pub level_integrals: Vec<f64>,
    pub verdict: RayVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub rays: Vec<RayReport>,
}

impl CompletenessReport {
    pub fn all_complete(&self) -> bool {
        self.rays.iter().all(|r| r.verdict == RayVerdict::Complete)
    }
}

const LEVELS: usize = 8;

/// Extends every truncation boundary vertex by a geometric ray and decides
/// whether the Riemannian length `∑_e ∫ √φ_e` of the extension diverges.
///
/// The ray continues the last edge with lengths multiplied by `r`, the ratio
/// between the boundary edge and its inward neighbour, and carries the same
/// profile formula in the global coordinate.
pub fn completeness_indicator(g: &MetricGraph, coeffs: &[EdgeCoefficients]) -> CompletenessReport {
    let mut rays = Vec::new();
    for v in g.vertices.iter().filter(|v| v.boundary) {
        let Some(&e) = g.adjacency[v.id].first() else { continue };
        let edge = &g.edges[e];
        let inner = edge.other(v.id);
        let ratio = g.adjacency[inner]
            .iter()
            .find(|&&f| f != e)
            .map(|&f| edge.length / g.edges[f].length)
            .unwrap_or(1.0);
        let (verdict, level_integrals) = match coeffs.get(e) {
            Some(c) => classify(&c.phi, edge.length, edge.coordinate_of(v.id), v.id == edge.head, ratio),
            None => (RayVerdict::Unknown, Vec::new()),
        };
        rays.push(RayReport { vertex: v.id, edge: e, ratio, level_integrals, verdict });
    }
    CompletenessReport { rays }
}

fn classify(phi: &Profile, length: f64, s_v: f64, outward_up: bool, r: f64) -> (RayVerdict, Vec<f64>) {
    let tol = 1e-9;
    match phi.kind {
        ProfileKind::Constant { c } => {
            let levels = (1..=LEVELS).map(|j| c.sqrt() * length * r.powi(j as i32)).collect();
            let verdict = if r >= 1.0 - tol { RayVerdict::Complete } else { RayVerdict::Incomplete };
            (verdict, levels)
        }
        ProfileKind::Power { c, gamma } => {
            let h = gamma / 2.0;
            let root = Profile::power(c.sqrt(), h, 0.0);
            let sigma_v = phi.offset + s_v;
            let dir = if outward_up { 1.0 } else { -1.0 };
            // Heights of the extension vertices in closed form, σ_j = A + B r^j.
            let height = |j: i32| -> f64 {
                if (r - 1.0).abs() <= tol {
                    return sigma_v + dir * length * j as f64;
                }
                let b = -dir * length * r / (1.0 - r);
                let mut a = sigma_v - b;
                if a.abs() <= tol * sigma_v {
                    a = 0.0;
                }
                a + b * r.powi(j)
            };
            let mut levels = Vec::new();
            for j in 0..LEVELS as i32 {
                let (lo, hi) = (height(j), height(j + 1));
                if hi <= 0.0 {
                    break;
                }
                levels.push(root.integral(lo.min(hi), lo.max(hi)));
            }
            let verdict = if outward_up {
                if r >= 1.0 - tol {
                    if h >= -1.0 { RayVerdict::Complete } else { RayVerdict::Incomplete }
                } else {
                    RayVerdict::Incomplete
                }
            } else if r >= 1.0 - tol {
                RayVerdict::Unknown
            } else {
                let sigma_inf = sigma_v - length * r / (1.0 - r);
                if sigma_inf > tol * sigma_v {
                    RayVerdict::Incomplete
                } else if sigma_inf.abs() <= tol * sigma_v {
                    if h + 1.0 <= tol { RayVerdict::Complete } else { RayVerdict::Incomplete }
                } else {
                    RayVerdict::Unknown
                }
            };
            (verdict, levels)
        }
        ProfileKind::TabulatedLogLinear { .. } => (RayVerdict::Unknown, Vec::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::build_tree;

    fn hyperbolic(g: &MetricGraph, q: f64) -> Vec<EdgeCoefficients> {
        g.edges
            .iter()
            .map(|e| {
                let off = q.powi(e.level.unwrap() - 1);
                EdgeCoefficients::from_phi_psi(Profile::power(1.0, -2.0, off), Profile::constant(1.0), 1).unwrap()
            })
            .collect()
    }

    #[test]
    fn hyperbolic_rays_are_complete_for_every_q() {
        for q in [1.3, 2.0, 3.5] {
            let g = build_tree(2, q, -1, 2).unwrap();
            let report = completeness_indicator(&g, &hyperbolic(&g, q));
            assert!(report.all_complete(), "q = {q}: {report:?}");
            let root = report.rays.iter().find(|r| r.vertex == 0).unwrap();
            for v in &root.level_integrals {
                assert!((v - q.ln()).abs() < 1e-12, "q = {q}: {:?}", root.level_integrals);
            }
        }
    }

    #[test]
    fn shrinking_constant_ray_is_incomplete() {
        let g = MetricGraph::path(&[1.0, 0.5, 0.25]).unwrap();
        let coeffs = vec![
            EdgeCoefficients::from_phi_psi(Profile::constant(1.0), Profile::constant(1.0), 0).unwrap();
            3
        ];
        let report = completeness_indicator(&g, &coeffs);
        let far = report.rays.iter().find(|r| r.vertex == 3).unwrap();
        assert_eq!(far.verdict, RayVerdict::Incomplete);
        let near = report.rays.iter().find(|r| r.vertex == 0).unwrap();
        assert_eq!(near.verdict, RayVerdict::Complete);
    }

    #[test]
    fn unit_edges_are_complete_and_tables_unknown() {
        let g = MetricGraph::path(&[1.0, 1.0]).unwrap();
        let c = EdgeCoefficients::from_phi_psi(Profile::constant(1.0), Profile::constant(1.0), 0).unwrap();
        assert!(completeness_indicator(&g, &[c.clone(), c.clone()]).all_complete());
        let t = Profile::tabulated(vec![0.0, 1.0], &[1.0, 2.0]).unwrap();
        let ct = EdgeCoefficients::from_phi_psi(t, Profile::constant(1.0), 1).unwrap();
        let report = completeness_indicator(&g, &[ct.clone(), ct]);
        assert!(report.rays.iter().all(|r| r.verdict == RayVerdict::Unknown));
    }
}
