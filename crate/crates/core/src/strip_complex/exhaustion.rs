//! Exhaustion functions adapted to the strip structure.

use super::{PointOnComplex, StripComplex};
use crate::assembly::Grid;
use crate::error::{Error, Result};
use crate::metric_graph::{smoothstep, EdgeExhaustion};

/// A proper function on the complex.
pub trait Exhaustion {
    fn eval(&self, p: PointOnComplex) -> Result<f64>;
}

impl Exhaustion for EdgeExhaustion {
    fn eval(&self, p: PointOnComplex) -> Result<f64> {
        match p {
            PointOnComplex::Strip { edge, s, .. } => {
                if edge >= self.slope.len() {
                    return Err(Error::Domain(format!("unknown edge {edge}")));
                }
                Ok(EdgeExhaustion::eval(self, edge, s))
            }
            PointOnComplex::Manifold { vertex, .. } => self
                .vertex_values
                .get(vertex)
                .copied()
                .ok_or_else(|| Error::Domain(format!("unknown vertex {vertex}"))),
        }
    }
}

/// Scale-periodic height function: `η ≡ 1` near `y = 1`, `η(q y) = q η(y)`.
///
/// On one period `[1, q]` it is 1 up to `1 + q/8`, equals `q` from `q − 1/8`
/// and is a quintic blend in between, so it is C² and constant on a window
/// around every `q^k`.
pub fn eta(q: f64, y: f64) -> f64 {
    let k = y.ln() / q.ln();
    let k = k.floor();
    let scale = q.powf(k);
    let mut u = y / scale;
    let mut scale = scale;
    if u >= q {
        u /= q;
        scale *= q;
    } else if u < 1.0 {
        u *= q;
        scale /= q;
    }
    let (lo, hi) = (1.0 + q / 8.0, q - 1.0 / 8.0);
    scale * (1.0 + (q - 1.0) * smoothstep((u - lo) / (hi - lo)))
}

/// `ρ₁ = δ(x + iη(y)) + κ` on a treebolic complex.
pub struct TreebolicExhaustion {
    q: f64,
    edge_offset: Vec<f64>,
    /// Level of the branch vertex off the reference ray, `None` on the ray.
    edge_branch: Vec<Option<i32>>,
    vertex_branch: Vec<Option<i32>>,
    vertex_height: Vec<f64>,
}

impl TreebolicExhaustion {
    pub fn new(sc: &StripComplex) -> Result<Self> {
        let tree = sc
            .graph
            .tree
            .as_ref()
            .ok_or_else(|| Error::Domain("treebolic exhaustion needs a tree-built complex with a reference end".into()))?;
        if tree.q <= 9.0 / 7.0 {
            return Err(Error::Parameter(format!(
                "the height cutoff needs q > 9/7 so that its flat windows do not overlap, got q = {}",
                tree.q
            )));
        }
        let level = |v: usize| sc.graph.vertices[v].level.expect("tree vertex");
        let branch = |v: usize| {
            if tree.on_reference_geodesic(v) {
                None
            } else {
                Some(level(tree.branch_vertex(v)))
            }
        };
        Ok(TreebolicExhaustion {
            q: tree.q,
            edge_offset: sc.graph.edges.iter().map(|e| tree.level_span(e.level.expect("tree edge")).0).collect(),
            edge_branch: sc.graph.edges.iter().map(|e| branch(e.head)).collect(),
            vertex_branch: (0..sc.graph.vertices.len()).map(branch).collect(),
            vertex_height: (0..sc.graph.vertices.len()).map(|v| tree.q.powi(level(v))).collect(),
        })
    }

    pub fn eval_xy(&self, x: f64, y: f64, branch: Option<i32>) -> f64 {
        let h = eta(self.q, y);
        let delta = (1.0 + (1.0 + x * x + h * h) / h).ln();
        let kappa = branch.map_or(0.0, |k| eta(self.q, y * self.q.powi(-k)).ln());
        delta + kappa
    }
}

impl Exhaustion for TreebolicExhaustion {
    fn eval(&self, p: PointOnComplex) -> Result<f64> {
        match p {
            PointOnComplex::Strip { edge, s, x } => {
                let off = *self.edge_offset.get(edge).ok_or_else(|| Error::Domain(format!("unknown edge {edge}")))?;
                Ok(self.eval_xy(x, off + s, self.edge_branch[edge]))
            }
            PointOnComplex::Manifold { vertex, x } => {
                let y = *self.vertex_height.get(vertex).ok_or_else(|| Error::Domain(format!("unknown vertex {vertex}")))?;
                Ok(self.eval_xy(x, y, self.vertex_branch[vertex]))
            }
        }
    }
}

pub fn treebolic_exhaustion(sc: &StripComplex, xi: PointOnComplex) -> Result<f64> {
    sc.check_point(xi)?;
    TreebolicExhaustion::new(sc)?.eval(xi)
}

/// Cutoff `θ`: 1 on `[0, flat]`, 0 from `support` on, quintic in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaCutoff {
    pub flat: f64,
    pub support: f64,
}

impl Default for ThetaCutoff {
    fn default() -> Self {
        ThetaCutoff { flat: 1.0, support: 2.0 }
    }
}

impl ThetaCutoff {
    pub fn eval(&self, t: f64) -> f64 {
        1.0 - smoothstep((t - self.flat) / (self.support - self.flat))
    }
}

/// `ϱ_n = θ(ρ₀ / n)` at every grid node.
pub fn approx_unity(grid: &Grid, exhaustion: &dyn Exhaustion, n: u32, theta: ThetaCutoff) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Parameter("scale n must be positive".into()));
    }
    if !(theta.flat > 0.0 && theta.support > theta.flat) {
        return Err(Error::Parameter(format!("invalid cutoff {theta:?}")));
    }
    (0..grid.len())
        .map(|i| Ok(theta.eval(exhaustion.eval(grid.point(i))? / n as f64)))
        .collect()
}
