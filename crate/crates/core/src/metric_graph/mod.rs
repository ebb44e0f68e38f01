//! Metric graphs `(Γ, l)`, coefficient profiles and graph-level constructions.

mod completeness;
mod distance;
mod exhaustion;
mod profile;
mod tree;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use completeness::{completeness_indicator, CompletenessReport, RayVerdict, RayReport};
pub use distance::{distances_from, graph_distance};
pub use exhaustion::{edge_exhaustion, smoothstep, smoothstep_integral, EdgeExhaustion};
pub use profile::{EdgeCoefficients, Profile, ProfileKind};
pub use tree::{build_tree, TreeLayout};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    /// Truncation boundary flag; the boundary condition is chosen downstream.
    pub boundary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i32>,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }

    /// Local coordinate of the endpoint `v` (0 at the tail, `length` at the head).
    pub fn coordinate_of(&self, v: usize) -> f64 {
        if v == self.tail {
            0.0
        } else {
            self.length
        }
    }
}

/// A point of Γ¹: a vertex or a position `s ∈ [0, l_e]` on an edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphPoint {
    Vertex(usize),
    Edge { edge: usize, s: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// `E_v`: incident edge ids per vertex, in increasing edge order.
    pub adjacency: Vec<Vec<usize>>,
    pub tree: Option<TreeLayout>,
}

impl MetricGraph {
    /// Validates ids, lengths, loops and connectivity.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Parameter("graph has no vertices".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::Parameter(format!("vertex ids must be 0..n in order; found {} at {i}", v.id)));
            }
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(Error::Parameter(format!("edge ids must be 0..n in order; found {} at {i}", e.id)));
            }
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return Err(Error::Parameter(format!("edge {i} references a missing vertex")));
            }
            if e.tail == e.head {
                return Err(Error::Parameter(format!("edge {i} is a loop at vertex {}", e.tail)));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::Parameter(format!("edge {i} has non-positive length {}", e.length)));
            }
            adjacency[e.tail].push(i);
            adjacency[e.head].push(i);
        }
        let g = MetricGraph { vertices, edges, adjacency, tree: None };
        if g.vertices.len() > 1 && g.adjacency.iter().any(|a| a.is_empty()) {
            return Err(Error::Parameter("graph has an isolated vertex".into()));
        }
        if !g.is_connected() {
            return Err(Error::Parameter("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.adjacency[v] {
                let w = self.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn check_point(&self, p: GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Vertex(v) if v < self.vertices.len() => Ok(()),
            GraphPoint::Vertex(v) => Err(Error::Domain(format!("unknown vertex {v}"))),
            GraphPoint::Edge { edge, s } => {
                let e = self.edges.get(edge).ok_or_else(|| Error::Domain(format!("unknown edge {edge}")))?;
                if (0.0..=e.length).contains(&s) {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("s = {s} outside edge {edge} of length {}", e.length)))
                }
            }
        }
    }

    /// Star with one edge per entry of `lengths`; the center is vertex 0.
    pub fn star(lengths: &[f64]) -> Result<Self> {
        let mut vertices = vec![Vertex { id: 0, boundary: false, level: None }];
        let mut edges = Vec::new();
        for (i, &l) in lengths.iter().enumerate() {
            vertices.push(Vertex { id: i + 1, boundary: true, level: None });
            edges.push(Edge { id: i, tail: 0, head: i + 1, length: l, level: None });
        }
        MetricGraph::new(vertices, edges)
    }

    /// Path `0 - 1 - … - k` with the given edge lengths; both ends flagged.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let n = lengths.len() + 1;
        let vertices = (0..n)
            .map(|i| Vertex { id: i, boundary: i == 0 || i == n - 1, level: None })
            .collect();
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| Edge { id: i, tail: i, head: i + 1, length: l, level: None })
            .collect();
        MetricGraph::new(vertices, edges)
    }
}
