use super::{Edge, MetricGraph, Vertex};
use crate::error::{Error, Result};

/// Level bookkeeping of a truncated horocyclic tree `T_{p,q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeLayout {
    pub p: usize,
    pub q: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub parent: Vec<Option<usize>>,
    /// Edge joining a vertex to its parent.
    pub parent_edge: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

impl TreeLayout {
    pub fn root(&self) -> usize {
        0
    }

    /// Whether `v` lies on the reference ray obtained by always taking the first child.
    pub fn on_reference_geodesic(&self, v: usize) -> bool {
        let mut w = self.root();
        loop {
            if w == v {
                return true;
            }
            match self.children[w].first() {
                Some(&c) if c <= v => w = c,
                _ => return false,
            }
        }
    }

    /// The last vertex of the reference ray that is an ancestor of `v` (or `v` itself).
    pub fn branch_vertex(&self, v: usize) -> usize {
        let mut w = v;
        while !self.on_reference_geodesic(w) {
            w = self.parent[w].expect("root lies on the reference ray");
        }
        w
    }

    /// Heights `[q^{k-1}, q^k]` spanned by a level-`k` edge.
    pub fn level_span(&self, k: i32) -> (f64, f64) {
        (self.q.powi(k - 1), self.q.powi(k))
    }
}

/// Builds the full `p`-ary tree between horocycles `k_min` and `k_max`.
///
/// Vertex ids are assigned breadth-first from the root at level `k_min`; every
/// edge points from the parent (tail) to the child (head) so the local
/// coordinate increases with height.
pub fn build_tree(p: usize, q: f64, k_min: i32, k_max: i32) -> Result<MetricGraph> {
    if p < 1 {
        return Err(Error::Parameter(format!("p must be at least 1, got {p}")));
    }
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::Parameter(format!("q must exceed 1, got {q}")));
    }
    if k_min >= k_max {
        return Err(Error::Parameter(format!("need k_min < k_max, got {k_min} >= {k_max}")));
    }
    let depth = (k_max - k_min) as u32;
    let count: usize = (0..=depth).map(|d| p.checked_pow(d).unwrap_or(usize::MAX)).fold(0usize, |a, b| a.saturating_add(b));
    if count > 50_000_000 {
        return Err(Error::Parameter(format!("tree with {count} vertices is too large")));
    }

    let mut vertices = vec![Vertex { id: 0, boundary: true, level: Some(k_min) }];
    let mut edges = Vec::with_capacity(count - 1);
    let mut parent = vec![None];
    let mut parent_edge = vec![None];
    let mut children = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for k in k_min + 1..=k_max {
        let length = q.powi(k - 1) * (q - 1.0);
        let mut next = Vec::with_capacity(frontier.len() * p);
        for &v in &frontier {
            for _ in 0..p {
                let w = vertices.len();
                let e = edges.len();
                vertices.push(Vertex { id: w, boundary: k == k_max, level: Some(k) });
                edges.push(Edge { id: e, tail: v, head: w, length, level: Some(k) });
                parent.push(Some(v));
                parent_edge.push(Some(e));
                children.push(Vec::new());
                children[v].push(w);
                next.push(w);
            }
        }
        frontier = next;
    }
    let mut g = MetricGraph::new(vertices, edges)?;
    g.tree = Some(TreeLayout { p, q, k_min, k_max, parent, parent_edge, children });
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_counts_and_degrees() {
        let g = build_tree(2, 2.0, 0, 2).unwrap();
        assert_eq!(g.vertices.len(), 7);
        assert_eq!(g.edges.len(), 6);
        for v in &g.vertices {
            if v.level == Some(1) {
                assert_eq!(g.degree(v.id), 3);
            }
        }
    }

    #[test]
    fn edge_lengths_follow_levels() {
        let g = build_tree(2, 2.0, -1, 1).unwrap();
        let mut lengths: Vec<f64> = g.edges.iter().map(|e| e.length).collect();
        lengths.dedup();
        assert_eq!(lengths, vec![0.5, 1.0]);
        for e in &g.edges {
            assert_eq!(e.length, 2f64.powi(e.level.unwrap() - 1));
        }
    }

    #[test]
    fn unary_tree_is_a_path() {
        let g = build_tree(1, 2.0, -1, 1).unwrap();
        assert_eq!(g.edges.len(), 2);
        assert!(g.adjacency.iter().all(|a| a.len() <= 2));
        assert!(g.vertices[0].boundary && g.vertices[2].boundary && !g.vertices[1].boundary);
    }

    #[test]
    fn invalid_parameters() {
        assert!(build_tree(0, 2.0, 0, 1).is_err());
        assert!(build_tree(2, 1.0, 0, 1).is_err());
        assert!(build_tree(2, 2.0, 1, 1).is_err());
    }

    #[test]
    fn reference_ray_follows_first_children() {
        let g = build_tree(2, 2.0, 0, 3).unwrap();
        let t = g.tree.as_ref().unwrap();
        let ray: Vec<usize> = (0..g.vertices.len()).filter(|&v| t.on_reference_geodesic(v)).collect();
        assert_eq!(ray, vec![0, 1, 3, 7]);
        assert_eq!(t.branch_vertex(14), 0);
        assert_eq!(t.branch_vertex(10), 1);
    }
}
