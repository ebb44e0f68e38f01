use serde::Serialize;

use super::QuotientMap;
use crate::error::Result;
use crate::strip_complex::StripComplex;

const SAMPLES: usize = 8;
const TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `μ_e / μ₀∘π` is not constant along the edge.
    RatioNotConstant { edge: usize, spread: f64 },
    /// Energy and measure densities scale differently, so `π` is not measure-adapted along the edge.
    GeometryMismatch { edge: usize, spread: f64 },
    /// Pooled weights at the vertex give different constants on different target edges.
    VertexBalance { vertex: usize, target_vertex: usize, spread: f64 },
}

/// Outcome of the weight-compatibility check for a quotient map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityCertificate {
    pub ok: bool,
    /// `A(e)`, the ratio of source to target measure density (NaN if not constant).
    pub edge_factors: Vec<f64>,
    /// `a(v)`, the common ratio of pooled vertex weights (NaN if inconsistent).
    pub vertex_factors: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl CompatibilityCertificate {
    /// The vertex with the largest balance violation, with its relative spread.
    pub fn worst_vertex(&self) -> Option<(usize, f64)> {
        self.violations
            .iter()
            .filter_map(|v| match *v {
                Violation::VertexBalance { vertex, spread, .. } => Some((vertex, spread)),
                _ => None,
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Target vertices at which the balance fails.
    pub fn conflicting_classes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .violations
            .iter()
            .filter_map(|v| match *v {
                Violation::VertexBalance { target_vertex, .. } => Some(target_vertex),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo - 1.0
    } else {
        f64::INFINITY
    }
}

/// Samples `A(e)` on every edge and checks the pooled vertex balance.
///
/// Weights are the fiber-integrated measure densities `m·|M|`; the energy
/// densities `a·|M|` must scale by the same factor.
pub fn check_weight_compatibility(source: &StripComplex, target: &StripComplex, map: &QuotientMap) -> Result<CompatibilityCertificate> {
    map.validate(&source.graph, &target.graph)?;
    let (vs, vt) = (source.fiber.volume(), target.fiber.volume());
    let mut violations = Vec::new();
    let mut edge_factors = Vec::with_capacity(source.graph.edges.len());
    for e in &source.graph.edges {
        let (c, c0) = (&source.coeffs[e.id], &target.coeffs[map.edges[e.id]]);
        let mut mass = Vec::with_capacity(SAMPLES);
        let mut energy = Vec::with_capacity(SAMPLES);
        for i in 0..SAMPLES {
            let s = e.length * (i as f64 + 0.5) / SAMPLES as f64;
            mass.push(c.m.eval(s) * vs / (c0.m.eval(s) * vt));
            energy.push(c.a.eval(s) * vs / (c0.a.eval(s) * vt));
        }
        let sm = spread(&mass);
        if sm > TOL {
            violations.push(Violation::RatioNotConstant { edge: e.id, spread: sm });
            edge_factors.push(f64::NAN);
            continue;
        }
        let mut both = mass.clone();
        both.extend(&energy);
        let sg = spread(&both);
        if sg > TOL {
            violations.push(Violation::GeometryMismatch { edge: e.id, spread: sg });
        }
        edge_factors.push(mass[0]);
    }

    let mut vertex_factors = Vec::with_capacity(source.graph.vertices.len());
    for v in 0..source.graph.vertices.len() {
        let v0 = map.vertices[v];
        let ratios: Vec<f64> = target.graph.adjacency[v0]
            .iter()
            .map(|&e0| {
                let t = &target.graph.edges[e0];
                let w0 = target.coeffs[e0].m.eval(t.coordinate_of(v0)) * vt;
                let pooled: f64 = source.graph.adjacency[v]
                    .iter()
                    .filter(|&&e| map.edges[e] == e0)
                    .map(|&e| source.coeffs[e].m.eval(source.graph.edges[e].coordinate_of(v)) * vs)
                    .sum();
                pooled / w0
            })
            .collect();
        let sv = spread(&ratios);
        if sv > TOL {
            violations.push(Violation::VertexBalance { vertex: v, target_vertex: v0, spread: sv });
            vertex_factors.push(f64::NAN);
        } else {
            vertex_factors.push(ratios[0]);
        }
    }
    Ok(CompatibilityCertificate { ok: violations.is_empty(), edge_factors, vertex_factors, violations })
}
