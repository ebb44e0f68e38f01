//! Quotient maps between strip complexes and the checks that make them
//! projections of the heat flow: fiber collapse, plane slicing and the
//! horocyclic collapse of a tree onto a line.

mod compare;
mod compat;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::Grid;
use crate::error::{Error, Result};
use crate::metric_graph::{build_tree, EdgeCoefficients, MetricGraph, Profile};
use crate::strip_complex::{build_treebolic, Fiber, StripComplex, TreebolicParams};

pub use compare::{aggregate, aggregate_counts, coincident_nodes, compare_projected_heat, compare_with_reference, ProjectionReport};
pub use compat::{check_weight_compatibility, CompatibilityCertificate, Violation};

/// Which structured quotient produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientKind {
    Identity,
    CollapseFiber,
    SlicePlane,
    Horocyclic,
    General,
}

/// Graph homomorphism `π` with orientation-preserving edge map and claimed weight constants `A(e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuotientDocument", into = "QuotientDocument")]
pub struct QuotientMap {
    pub kind: QuotientKind,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub factors: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct QuotientDocument {
    kind: QuotientKind,
    edges: BTreeMap<String, usize>,
    vertices: BTreeMap<String, usize>,
    #[serde(rename = "A")]
    factors: BTreeMap<String, f64>,
}

fn dense<T: Copy>(name: &str, map: BTreeMap<String, T>) -> Result<Vec<T>> {
    let mut out = vec![None; map.len()];
    for (k, v) in map {
        let i: usize = k.parse().map_err(|_| Error::Configuration(format!("{name}.{k}: key is not an index")))?;
        let slot = out.get_mut(i).ok_or_else(|| Error::Configuration(format!("{name}.{k}: index out of range")))?;
        *slot = Some(v);
    }
    out.into_iter().enumerate().map(|(i, v)| v.ok_or_else(|| Error::Configuration(format!("{name}.{i} is missing")))).collect()
}

impl TryFrom<QuotientDocument> for QuotientMap {
    type Error = Error;
    fn try_from(doc: QuotientDocument) -> Result<Self> {
        let edges = dense("edges", doc.edges)?;
        let factors = dense("A", doc.factors)?;
        if factors.len() != edges.len() {
            return Err(Error::Configuration(format!("A has {} entries for {} edges", factors.len(), edges.len())));
        }
        Ok(QuotientMap { kind: doc.kind, vertices: dense("vertices", doc.vertices)?, edges, factors })
    }
}

impl From<QuotientMap> for QuotientDocument {
    fn from(q: QuotientMap) -> Self {
        let index = |v: &[usize]| v.iter().enumerate().map(|(i, &d)| (i.to_string(), d)).collect();
        QuotientDocument {
            kind: q.kind,
            edges: index(&q.edges),
            vertices: index(&q.vertices),
            factors: q.factors.iter().enumerate().map(|(i, &a)| (i.to_string(), a)).collect(),
        }
    }
}

impl QuotientMap {
    /// Checks sizes and that `π(e⁻), π(e⁺)` are the endpoints of `π(e)`.
    pub fn validate(&self, source: &MetricGraph, target: &MetricGraph) -> Result<()> {
        if self.vertices.len() != source.vertices.len() {
            return Err(Error::Shape { expected: source.vertices.len(), actual: self.vertices.len() });
        }
        if self.edges.len() != source.edges.len() || self.factors.len() != source.edges.len() {
            return Err(Error::Shape { expected: source.edges.len(), actual: self.edges.len() });
        }
        if let Some(&v) = self.vertices.iter().find(|&&v| v >= target.vertices.len()) {
            return Err(Error::Configuration(format!("vertex image {v} is not a target vertex")));
        }
        for (e, &e0) in source.edges.iter().zip(&self.edges) {
            let t = target.edges.get(e0).ok_or_else(|| Error::Configuration(format!("edge image {e0} is not a target edge")))?;
            if self.vertices[e.tail] != t.tail || self.vertices[e.head] != t.head {
                return Err(Error::Configuration(format!(
                    "edge {} maps to edge {e0} but its endpoints map to ({}, {}) instead of ({}, {})",
                    e.id, self.vertices[e.tail], self.vertices[e.head], t.tail, t.head
                )));
            }
            if (e.length - t.length).abs() > 1e-12 * t.length {
                return Err(Error::Configuration(format!("edge {} has length {} but its image has {}", e.id, e.length, t.length)));
            }
        }
        Ok(())
    }

    pub fn identity(g: &MetricGraph) -> Self {
        QuotientMap {
            kind: QuotientKind::Identity,
            vertices: (0..g.vertices.len()).collect(),
            edges: (0..g.edges.len()).collect(),
            factors: vec![1.0; g.edges.len()],
        }
    }

    /// Source grid node → target grid node; the grids must agree along every edge.
    pub fn node_table(&self, source: &Grid, target: &Grid) -> Result<Vec<usize>> {
        if source.nodes_per_edge != target.nodes_per_edge {
            return Err(Error::Configuration(format!(
                "grid mismatch: {} vs {} nodes per edge",
                source.nodes_per_edge, target.nodes_per_edge
            )));
        }
        let same_fiber = source.fiber == target.fiber;
        if same_fiber && source.fiber_nodes != target.fiber_nodes {
            return Err(Error::Configuration("grid mismatch: different fiber resolutions".into()));
        }
        if !same_fiber && target.fiber != Fiber::Point {
            return Err(Error::Configuration("fiber can only be kept or collapsed to a point".into()));
        }
        for (e, &e0) in self.edges.iter().enumerate() {
            let (a, b) = (&source.s_nodes[e], &target.s_nodes[e0]);
            if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + y.abs())) {
                return Err(Error::Configuration(format!("grid mismatch on edge {e}: target grid is not the image of the source grid")));
            }
        }
        let fiber = |j: usize| if same_fiber { j } else { 0 };
        let mut table = vec![usize::MAX; source.len()];
        for (e, &e0) in self.edges.iter().enumerate() {
            for i in 0..source.nodes_per_edge {
                for j in 0..source.fiber_nodes {
                    table[source.node(e, i, j)] = target.node(e0, i, fiber(j));
                }
            }
        }
        for v in 0..self.vertices.len() {
            for j in 0..source.fiber_nodes {
                table[source.vertex_node(v, j)] = target.vertex_node(self.vertices[v], fiber(j));
            }
        }
        Ok(table)
    }
}

/// Collapses the fiber; the quotient keeps the per-edge `(a, m)` and has a point fiber.
///
/// A complex whose fiber is already a point is returned unchanged with the identity map.
pub fn collapse_fiber(sc: &StripComplex) -> Result<(StripComplex, QuotientMap)> {
    if sc.fiber == Fiber::Point {
        return Ok((sc.clone(), QuotientMap::identity(&sc.graph)));
    }
    let coeffs = sc.coeffs.iter().map(|c| EdgeCoefficients::from_a_m(c.a.clone(), c.m.clone(), 0)).collect::<Result<Vec<_>>>()?;
    let mut target = StripComplex::new(sc.graph.clone(), Fiber::Point, coeffs)?;
    target.treebolic = sc.treebolic.map(|t| TreebolicParams { half_width: 0.0, ..t });
    let mut map = QuotientMap::identity(&sc.graph);
    map.kind = QuotientKind::CollapseFiber;
    map.factors = vec![sc.fiber.volume(); sc.graph.edges.len()];
    Ok((target, map))
}

fn tree_params(sc: &StripComplex) -> Result<TreebolicParams> {
    match (&sc.treebolic, &sc.graph.tree) {
        (Some(t), Some(_)) => Ok(*t),
        _ => Err(Error::Domain("complex is not a treebolic space".into())),
    }
}

/// Level maps of a tree onto the line `T_{1,q}` with the same horocycles.
fn level_map(g: &MetricGraph, k_min: i32) -> (Vec<usize>, Vec<usize>) {
    let vertices = g.vertices.iter().map(|v| (v.level.expect("tree vertex") - k_min) as usize).collect();
    let edges = g.edges.iter().map(|e| (e.level.expect("tree edge") - k_min - 1) as usize).collect();
    (vertices, edges)
}

/// Slices `HT(p, q)` with weights `(α, β)` onto the sliced half-plane `HT(1, q)` with `(α, βp)`.
pub fn slice_plane(sc: &StripComplex) -> Result<(StripComplex, QuotientMap)> {
    let t = tree_params(sc)?;
    let target = if sc.fiber == Fiber::Point {
        crate::strip_complex::build_tree_complex(1, t.q, t.alpha, t.beta * t.p as f64, t.k_min, t.k_max)?
    } else {
        build_treebolic(1, t.q, t.alpha, t.beta * t.p as f64, t.k_min, t.k_max, t.half_width)?
    };
    let (vertices, edges) = level_map(&sc.graph, t.k_min);
    let p = t.p as f64;
    let factors = sc.graph.edges.iter().map(|e| p.powi(-e.level.unwrap())).collect();
    let kind = if t.p == 1 { QuotientKind::Identity } else { QuotientKind::SlicePlane };
    Ok((target, QuotientMap { kind, vertices, edges, factors }))
}

/// Tree `T_{p,q}` with hyperbolic geometry `φ = σ⁻²` and measure profile `ψ_e ≡ p^{−k} b_k` on level-`k` edges.
///
/// `b` lists the constants for levels `k_min + 1 ..= k_max`.
pub fn horocyclic_tree(p: usize, q: f64, k_min: i32, k_max: i32, b: &[f64]) -> Result<StripComplex> {
    let graph = build_tree(p, q, k_min, k_max)?;
    check_levels(b, k_min, k_max)?;
    let coeffs = graph
        .edges
        .iter()
        .map(|e| {
            let k = e.level.unwrap();
            let psi = Profile::constant((p as f64).powi(-k) * b[(k - k_min - 1) as usize]);
            EdgeCoefficients::from_phi_psi(Profile::power(1.0, -2.0, q.powi(k - 1)), psi, 0)
        })
        .collect::<Result<Vec<_>>>()?;
    StripComplex::new(graph, Fiber::Point, coeffs)
}

fn check_levels(b: &[f64], k_min: i32, k_max: i32) -> Result<()> {
    if b.len() != (k_max - k_min) as usize {
        return Err(Error::Parameter(format!("need {} level constants b_k, got {}", k_max - k_min, b.len())));
    }
    if let Some(x) = b.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Parameter(format!("level constants must be positive, got {x}")));
    }
    Ok(())
}

/// Collapses a tree onto the line over the horocycle index; target edges carry `ψ₀ ≡ b_k`.
///
/// The source must satisfy the vertex balance `∑_children A(e) = A(parent edge)`;
/// otherwise the worst vertex is reported as incompatible.
pub fn horocyclic_collapse(sc: &StripComplex, b: &[f64]) -> Result<(StripComplex, QuotientMap, CompatibilityCertificate)> {
    let tree = sc.graph.tree.as_ref().ok_or_else(|| Error::Domain("horocyclic collapse needs a tree-built complex".into()))?;
    check_levels(b, tree.k_min, tree.k_max)?;
    let line = build_tree(1, tree.q, tree.k_min, tree.k_max)?;
    let (vertices, edges) = level_map(&sc.graph, tree.k_min);
    // Geometry of the line is read off the reference ray.
    let mut reference = vec![usize::MAX; line.edges.len()];
    let mut v = tree.root();
    while let Some(&c) = tree.children[v].first() {
        let e = tree.parent_edge[c].unwrap();
        reference[edges[e]] = e;
        v = c;
    }
    let n = sc.fiber.dimension();
    let coeffs = line
        .edges
        .iter()
        .map(|e0| {
            let phi = sc.coeffs[reference[e0.id]].phi.clone();
            EdgeCoefficients::from_phi_psi(phi, Profile::constant(b[e0.id]), n)
        })
        .collect::<Result<Vec<_>>>()?;
    let target = StripComplex::new(line, sc.fiber, coeffs)?;
    let p = tree.p as f64;
    let factors = sc.graph.edges.iter().map(|e| p.powi(-e.level.unwrap())).collect();
    let map = QuotientMap { kind: QuotientKind::Horocyclic, vertices, edges, factors };
    map.validate(&sc.graph, &target.graph)?;
    let cert = check_weight_compatibility(sc, &target, &map)?;
    if let Some(worst) = cert.worst_vertex() {
        return Err(Error::Incompatible {
            vertex: worst.0,
            message: format!("vertex balance of measure weights fails by {:.3e}", worst.1),
        });
    }
    if let Some(e) = (0..map.edges.len()).find(|&e| (cert.edge_factors[e] / map.factors[e] - 1.0).abs() > 1e-10) {
        return Err(Error::Incompatible {
            vertex: sc.graph.edges[e].tail,
            message: format!("edge {e} has weight ratio {} instead of p^-k = {}", cert.edge_factors[e], map.factors[e]),
        });
    }
    Ok((target, map, cert))
}
