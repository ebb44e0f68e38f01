//! Strip complexes `X_M = Γ¹ × M` and their geometry.

mod exhaustion;
mod geometry;
mod treebolic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_graph::{EdgeCoefficients, GraphPoint, MetricGraph};

pub use exhaustion::{approx_unity, treebolic_exhaustion, eta, Exhaustion, ThetaCutoff, TreebolicExhaustion};
pub use geometry::{ball_volume, ball_volumes, distance, measure, Cell, DistanceGrid, Resolution};
pub use treebolic::{build_tree_complex, build_treebolic, TreebolicParams};

/// The fiber `M`. Intervals and circles use the coordinate `x ∈ [-L/2, L/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fiber {
    Point,
    Circle { length: f64 },
    /// Reflecting ends.
    Interval { length: f64 },
}

impl Fiber {
    pub fn dimension(&self) -> u8 {
        match self {
            Fiber::Point => 0,
            _ => 1,
        }
    }

    pub fn length(&self) -> Option<f64> {
        match *self {
            Fiber::Point => None,
            Fiber::Circle { length } | Fiber::Interval { length } => Some(length),
        }
    }

    /// Measure of the whole fiber (1 for a point).
    pub fn volume(&self) -> f64 {
        self.length().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self.length() {
            Some(l) if !(l.is_finite() && l > 0.0) => {
                Err(Error::Parameter(format!("fiber length must be positive, got {l}")))
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.length() {
            None => x == 0.0,
            Some(l) => x.abs() <= l / 2.0 * (1.0 + 1e-12),
        }
    }

    /// Signed fiber displacement from `x0` to `x1` (shortest way round on a circle).
    pub fn displacement(&self, x0: f64, x1: f64) -> f64 {
        match *self {
            Fiber::Circle { length } => {
                let d = (x1 - x0).rem_euclid(length);
                if d > length / 2.0 {
                    d - length
                } else {
                    d
                }
            }
            _ => x1 - x0,
        }
    }
}

/// A point `ξ` of the complex: inside a strip or on a bifurcation manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointOnComplex {
    Strip { edge: usize, s: f64, x: f64 },
    Manifold { vertex: usize, x: f64 },
}

impl PointOnComplex {
    pub fn x(&self) -> f64 {
        match *self {
            PointOnComplex::Strip { x, .. } | PointOnComplex::Manifold { x, .. } => x,
        }
    }

    pub fn graph_point(&self) -> GraphPoint {
        match *self {
            PointOnComplex::Strip { edge, s, .. } => GraphPoint::Edge { edge, s },
            PointOnComplex::Manifold { vertex, .. } => GraphPoint::Vertex(vertex),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StripComplex {
    pub graph: MetricGraph,
    pub fiber: Fiber,
    pub coeffs: Vec<EdgeCoefficients>,
    pub treebolic: Option<TreebolicParams>,
}

impl StripComplex {
    pub fn new(graph: MetricGraph, fiber: Fiber, coeffs: Vec<EdgeCoefficients>) -> Result<Self> {
        fiber.validate()?;
        if coeffs.len() != graph.edges.len() {
            return Err(Error::Shape { expected: graph.edges.len(), actual: coeffs.len() });
        }
        for (e, c) in graph.edges.iter().zip(&coeffs) {
            if c.n != fiber.dimension() {
                return Err(Error::Parameter(format!(
                    "edge {} coefficients use fiber dimension {} but the fiber has dimension {}",
                    e.id,
                    c.n,
                    fiber.dimension()
                )));
            }
            c.validate(e.length)?;
        }
        Ok(StripComplex { graph, fiber, coeffs, treebolic: None })
    }

    /// Unit coefficients `φ ≡ ψ ≡ 1` on every edge.
    pub fn flat(graph: MetricGraph, fiber: Fiber) -> Result<Self> {
        use crate::metric_graph::Profile;
        let c = EdgeCoefficients::from_phi_psi(Profile::constant(1.0), Profile::constant(1.0), fiber.dimension())?;
        let coeffs = vec![c; graph.edges.len()];
        StripComplex::new(graph, fiber, coeffs)
    }

    pub fn check_point(&self, p: PointOnComplex) -> Result<()> {
        self.graph.check_point(p.graph_point())?;
        if !self.fiber.contains(p.x()) {
            return Err(Error::Domain(format!("x = {} outside the fiber", p.x())));
        }
        Ok(())
    }

    /// Total measure `μ(X_M)`.
    pub fn total_measure(&self) -> f64 {
        self.graph
            .edges
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| c.m.integral(0.0, e.length))
            .sum::<f64>()
            * self.fiber.volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_displacement_wraps() {
        let f = Fiber::Circle { length: 2.0 };
        assert!((f.displacement(-0.9, 0.9) + 0.2).abs() < 1e-15);
        assert!((f.displacement(0.1, 0.4) - 0.3).abs() < 1e-15);
        assert_eq!(Fiber::Interval { length: 2.0 }.displacement(-0.9, 0.9), 1.8);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = MetricGraph::path(&[1.0]).unwrap();
        let sc = StripComplex::flat(g.clone(), Fiber::Point).unwrap();
        assert!(StripComplex::new(g, Fiber::Interval { length: 1.0 }, sc.coeffs).is_err());
    }
}
