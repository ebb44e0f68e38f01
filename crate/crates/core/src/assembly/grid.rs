use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_graph::ProfileKind;
use crate::strip_complex::{Fiber, PointOnComplex, StripComplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingRule {
    Uniform,
    /// Geometric in the global coordinate `σ = offset + s` (needs `offset > 0`).
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeLocation {
    Vertex { vertex: usize, j: usize },
    Edge { edge: usize, i: usize, j: usize },
}

/// Tensor grid per strip with one shared node set per bifurcation manifold.
///
/// Node order: all vertex layers first (`vertex * M + j`), then the interior
/// layers of each edge (`i = 1..N-1`), with the fiber index running fastest.
#[derive(Clone, Debug)]
pub struct Grid {
    pub nodes_per_edge: usize,
    pub fiber_nodes: usize,
    pub spacing: SpacingRule,
    pub fiber: Fiber,
    /// Fiber coordinates of the `M` fiber nodes.
    pub xs: Vec<f64>,
    /// Dual fiber widths (1 for a point fiber).
    pub widths: Vec<f64>,
    /// Local s-coordinates per edge, `N` entries from 0 to `l_e`.
    pub s_nodes: Vec<Vec<f64>>,
    edge_base: Vec<usize>,
    tails: Vec<usize>,
    heads: Vec<usize>,
    n_vertices: usize,
    n_nodes: usize,
}

fn geometric_offset(sc: &StripComplex, edge: usize) -> Option<f64> {
    let a = &sc.coeffs[edge].a;
    let offset = match a.kind {
        ProfileKind::Power { .. } => a.offset,
        _ => sc.coeffs[edge].m.offset,
    };
    (offset > 0.0).then_some(offset)
}

/// Builds the grid with the default spacing: geometric on tree-built
/// complexes, uniform otherwise.
pub fn build_grid(sc: &StripComplex, nodes_per_edge: usize, fiber_nodes: usize) -> Result<Grid> {
    let rule = if sc.graph.tree.is_some() { SpacingRule::Geometric } else { SpacingRule::Uniform };
    Grid::new(sc, nodes_per_edge, fiber_nodes, rule)
}

impl Grid {
    pub fn new(sc: &StripComplex, nodes_per_edge: usize, fiber_nodes: usize, spacing: SpacingRule) -> Result<Grid> {
        if nodes_per_edge < 2 {
            return Err(Error::Parameter(format!("nodes_per_edge must be at least 2, got {nodes_per_edge}")));
        }
        if fiber_nodes < 1 {
            return Err(Error::Parameter("fiber_nodes must be at least 1".into()));
        }
        let m = if sc.fiber.dimension() == 0 { 1 } else { fiber_nodes };
        let (xs, widths) = fiber_layout(&sc.fiber, m);
        let n = nodes_per_edge;
        let s_nodes = sc
            .graph
            .edges
            .iter()
            .map(|e| {
                let offset = match spacing {
                    SpacingRule::Geometric => geometric_offset(sc, e.id),
                    SpacingRule::Uniform => None,
                };
                let mut s: Vec<f64> = match offset {
                    Some(o) => {
                        let ratio = (o + e.length) / o;
                        (0..n).map(|i| o * ratio.powf(i as f64 / (n - 1) as f64) - o).collect()
                    }
                    None => (0..n).map(|i| e.length * i as f64 / (n - 1) as f64).collect(),
                };
                s[0] = 0.0;
                s[n - 1] = e.length;
                s
            })
            .collect();
        let n_vertices = sc.graph.vertices.len();
        let mut edge_base = Vec::with_capacity(sc.graph.edges.len());
        let mut next = n_vertices * m;
        for _ in &sc.graph.edges {
            edge_base.push(next);
            next += (n - 2) * m;
        }
        Ok(Grid {
            nodes_per_edge: n,
            fiber_nodes: m,
            spacing,
            fiber: sc.fiber,
            xs,
            widths,
            s_nodes,
            edge_base,
            tails: sc.graph.edges.iter().map(|e| e.tail).collect(),
            heads: sc.graph.edges.iter().map(|e| e.head).collect(),
            n_vertices,
            n_nodes: next,
        })
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.n_nodes == 0
    }

    pub fn n_edges(&self) -> usize {
        self.s_nodes.len()
    }

    /// Node id of layer `i` of `edge` at fiber index `j`.
    pub fn node(&self, edge: usize, i: usize, j: usize) -> usize {
        let m = self.fiber_nodes;
        if i == 0 {
            self.tails[edge] * m + j
        } else if i == self.nodes_per_edge - 1 {
            self.heads[edge] * m + j
        } else {
            self.edge_base[edge] + (i - 1) * m + j
        }
    }

    pub fn vertex_node(&self, vertex: usize, j: usize) -> usize {
        vertex * self.fiber_nodes + j
    }

    pub fn location(&self, node: usize) -> NodeLocation {
        let m = self.fiber_nodes;
        if node < self.n_vertices * m {
            return NodeLocation::Vertex { vertex: node / m, j: node % m };
        }
        let edge = self.edge_base.partition_point(|&b| b <= node) - 1;
        let r = node - self.edge_base[edge];
        NodeLocation::Edge { edge, i: r / m + 1, j: r % m }
    }

    pub fn point(&self, node: usize) -> PointOnComplex {
        match self.location(node) {
            NodeLocation::Vertex { vertex, j } => PointOnComplex::Manifold { vertex, x: self.xs[j] },
            NodeLocation::Edge { edge, i, j } => PointOnComplex::Strip { edge, s: self.s_nodes[edge][i], x: self.xs[j] },
        }
    }

    /// `(edge, s)` of a node, reporting vertex nodes on their first incident edge.
    pub fn edge_coordinate(&self, node: usize) -> (Option<usize>, f64) {
        match self.location(node) {
            NodeLocation::Vertex { .. } => (None, 0.0),
            NodeLocation::Edge { edge, i, .. } => (Some(edge), self.s_nodes[edge][i]),
        }
    }

    pub fn x_of(&self, node: usize) -> f64 {
        match self.location(node) {
            NodeLocation::Vertex { j, .. } | NodeLocation::Edge { j, .. } => self.xs[j],
        }
    }

    pub fn fiber_index(&self, node: usize) -> usize {
        match self.location(node) {
            NodeLocation::Vertex { j, .. } | NodeLocation::Edge { j, .. } => j,
        }
    }

    /// Neighbouring fiber indices with link lengths `Δx` (wrapping on circles).
    pub fn fiber_links(&self) -> Vec<(usize, usize, f64)> {
        let m = self.fiber_nodes;
        match self.fiber {
            Fiber::Point => Vec::new(),
            Fiber::Interval { .. } => (0..m.saturating_sub(1)).map(|j| (j, j + 1, self.xs[j + 1] - self.xs[j])).collect(),
            Fiber::Circle { length } if m >= 2 => (0..m).map(|j| (j, (j + 1) % m, length / m as f64)).collect(),
            Fiber::Circle { .. } => Vec::new(),
        }
    }

    /// Node map from this grid into `fine`, when `fine` halves every interval.
    pub fn nested_index(&self, fine: &Grid) -> Result<Vec<usize>> {
        let fn_ = fine.nodes_per_edge;
        if fn_ != 2 * self.nodes_per_edge - 1 || fine.n_edges() != self.n_edges() {
            return Err(Error::Configuration("grids are not nested (s direction)".into()));
        }
        let fiber_step = match self.fiber {
            Fiber::Point => 1,
            Fiber::Circle { .. } if fine.fiber_nodes == 2 * self.fiber_nodes => 2,
            Fiber::Interval { .. } if self.fiber_nodes == 1 && fine.fiber_nodes == 1 => 1,
            Fiber::Interval { .. } if fine.fiber_nodes == 2 * self.fiber_nodes - 1 => 2,
            _ => return Err(Error::Configuration("grids are not nested (fiber direction)".into())),
        };
        Ok((0..self.len())
            .map(|node| match self.location(node) {
                NodeLocation::Vertex { vertex, j } => fine.vertex_node(vertex, fiber_step * j),
                NodeLocation::Edge { edge, i, j } => fine.node(edge, 2 * i, fiber_step * j),
            })
            .collect())
    }
}

fn fiber_layout(fiber: &Fiber, m: usize) -> (Vec<f64>, Vec<f64>) {
    match *fiber {
        Fiber::Point => (vec![0.0], vec![1.0]),
        Fiber::Interval { length } if m == 1 => (vec![0.0], vec![length]),
        Fiber::Interval { length } => {
            let dx = length / (m - 1) as f64;
            let xs = (0..m).map(|j| -length / 2.0 + dx * j as f64).collect();
            let widths = (0..m).map(|j| if j == 0 || j == m - 1 { dx / 2.0 } else { dx }).collect();
            (xs, widths)
        }
        Fiber::Circle { length } => {
            let dx = length / m as f64;
            ((0..m).map(|j| -length / 2.0 + dx * j as f64).collect(), vec![dx; m])
        }
    }
}
