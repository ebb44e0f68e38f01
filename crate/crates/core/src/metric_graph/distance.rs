use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{GraphPoint, MetricGraph};
use crate::error::Result;

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

/// Multi-source Dijkstra over the vertices with per-edge weights.
pub(crate) fn dijkstra(g: &MetricGraph, seeds: &[(usize, f64)], weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.vertices.len()];
    let mut heap = BinaryHeap::new();
    for &(v, d) in seeds {
        if d < dist[v] {
            dist[v] = d;
            heap.push(Entry(d, v));
        }
    }
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &e in &g.adjacency[v] {
            let w = g.edges[e].other(v);
            let nd = d + weight(e);
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    dist
}

fn seeds_of(g: &MetricGraph, p: GraphPoint) -> Vec<(usize, f64)> {
    match p {
        GraphPoint::Vertex(v) => vec![(v, 0.0)],
        GraphPoint::Edge { edge, s } => {
            let e = &g.edges[edge];
            vec![(e.tail, s), (e.head, e.length - s)]
        }
    }
}

/// Distances in `(Γ¹, l)` from `a` to every vertex.
pub fn distances_from(g: &MetricGraph, a: GraphPoint) -> Result<Vec<f64>> {
    g.check_point(a)?;
    Ok(dijkstra(g, &seeds_of(g, a), |e| g.edges[e].length))
}

/// Shortest-path distance between two points of Γ¹.
pub fn graph_distance(g: &MetricGraph, a: GraphPoint, b: GraphPoint) -> Result<f64> {
    g.check_point(b)?;
    let dist = distances_from(g, a)?;
    let mut best = seeds_of(g, b).into_iter().map(|(v, d)| dist[v] + d).fold(f64::INFINITY, f64::min);
    if let (GraphPoint::Edge { edge: ea, s: sa }, GraphPoint::Edge { edge: eb, s: sb }) = (a, b) {
        if ea == eb {
            best = best.min((sa - sb).abs());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn star_leaves_are_two_apart() {
        let g = MetricGraph::star(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(graph_distance(&g, GraphPoint::Vertex(1), GraphPoint::Vertex(3)).unwrap(), 2.0);
        assert_eq!(graph_distance(&g, GraphPoint::Vertex(2), GraphPoint::Vertex(2)).unwrap(), 0.0);
        assert_eq!(graph_distance(&g, GraphPoint::Vertex(0), GraphPoint::Vertex(1)).unwrap(), 1.0);
    }

    #[test]
    fn unknown_edge_is_a_domain_error() {
        let g = MetricGraph::path(&[1.0]).unwrap();
        assert!(graph_distance(&g, GraphPoint::Edge { edge: 5, s: 0.0 }, GraphPoint::Vertex(0)).is_err());
    }

    fn cycle_with_chord() -> MetricGraph {
        use super::super::{Edge, Vertex};
        let vertices = (0..5).map(|id| Vertex { id, boundary: false, level: None }).collect();
        let spec = [(0, 1, 1.0), (1, 2, 2.5), (2, 3, 0.7), (3, 4, 1.3), (4, 0, 2.0), (1, 3, 1.1)];
        let edges = spec
            .iter()
            .enumerate()
            .map(|(id, &(tail, head, length))| Edge { id, tail, head, length, level: None })
            .collect();
        MetricGraph::new(vertices, edges).unwrap()
    }

    fn point() -> impl Strategy<Value = GraphPoint> {
        (0usize..6, 0.0f64..1.0).prop_map(|(edge, t)| {
            let lengths = [1.0, 2.5, 0.7, 1.3, 2.0, 1.1];
            GraphPoint::Edge { edge, s: t * lengths[edge] }
        })
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in point(), b in point(), c in point()) {
            let g = cycle_with_chord();
            let ab = graph_distance(&g, a, b).unwrap();
            let ba = graph_distance(&g, b, a).unwrap();
            let bc = graph_distance(&g, b, c).unwrap();
            let ac = graph_distance(&g, a, c).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!(ab >= 0.0);
        }
    }
}
