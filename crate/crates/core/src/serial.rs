//! JSON documents for graphs, complexes and quotient maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_graph::{build_tree, Edge, EdgeCoefficients, MetricGraph, Profile, Vertex};
use crate::strip_complex::{Fiber, StripComplex, TreebolicParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub phi: Profile,
    pub psi: Profile,
    pub n: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub p: usize,
    pub q: f64,
    pub k_min: i32,
    pub k_max: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub coefficients: BTreeMap<String, CoefficientRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexDocument {
    #[serde(flatten)]
    pub graph: GraphDocument,
    pub fiber: Fiber,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treebolic: Option<TreebolicParams>,
}

impl GraphDocument {
    pub fn from_graph(g: &MetricGraph) -> Self {
        GraphDocument {
            vertices: g.vertices.clone(),
            edges: g.edges.clone(),
            coefficients: BTreeMap::new(),
            tree: g.tree.as_ref().map(|t| TreeRecord { p: t.p, q: t.q, k_min: t.k_min, k_max: t.k_max }),
        }
    }

    pub fn to_graph(&self) -> Result<MetricGraph> {
        match self.tree {
            Some(t) => {
                let g = build_tree(t.p, t.q, t.k_min, t.k_max)?;
                if g.vertices != self.vertices || g.edges.len() != self.edges.len() {
                    return Err(Error::Configuration("tree record does not match the listed vertices and edges".into()));
                }
                for (a, b) in g.edges.iter().zip(&self.edges) {
                    if a.tail != b.tail || a.head != b.head || a.level != b.level || (a.length - b.length).abs() > 1e-12 * a.length {
                        return Err(Error::Configuration(format!("edge {} does not match the tree record", b.id)));
                    }
                }
                Ok(g)
            }
            None => MetricGraph::new(self.vertices.clone(), self.edges.clone()),
        }
    }
}

impl ComplexDocument {
    pub fn from_complex(sc: &StripComplex) -> Self {
        let mut graph = GraphDocument::from_graph(&sc.graph);
        graph.coefficients = sc
            .coeffs
            .iter()
            .enumerate()
            .map(|(e, c)| (e.to_string(), CoefficientRecord { phi: c.phi.clone(), psi: c.psi.clone(), n: c.n }))
            .collect();
        ComplexDocument { graph, fiber: sc.fiber, treebolic: sc.treebolic }
    }

    pub fn to_complex(&self) -> Result<StripComplex> {
        let graph = self.graph.to_graph()?;
        let coeffs = (0..graph.edges.len())
            .map(|e| {
                let rec = self
                    .graph
                    .coefficients
                    .get(&e.to_string())
                    .ok_or_else(|| Error::Configuration(format!("coefficients.{e} is missing")))?;
                EdgeCoefficients::from_phi_psi(rec.phi.clone(), rec.psi.clone(), rec.n)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sc = StripComplex::new(graph, self.fiber, coeffs)?;
        sc.treebolic = self.treebolic;
        Ok(sc)
    }
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strip_complex::build_treebolic;

    #[test]
    fn complex_round_trip() {
        let sc = build_treebolic(2, 2.0, 1.0, 0.5, -1, 1, 1.5).unwrap();
        let doc = ComplexDocument::from_complex(&sc);
        let text = serde_json::to_string(&doc).unwrap();
        let back: ComplexDocument = serde_json::from_str(&text).unwrap();
        let sc2 = back.to_complex().unwrap();
        assert_eq!(sc2.graph.edges, sc.graph.edges);
        assert_eq!(sc2.treebolic, sc.treebolic);
        for (a, b) in sc.coeffs.iter().zip(&sc2.coeffs) {
            assert!((a.m.eval(0.3) - b.m.eval(0.3)).abs() < 1e-14);
            assert!((a.a.eval(0.3) - b.a.eval(0.3)).abs() < 1e-14);
        }
        assert!(sc2.graph.tree.is_some());
    }

    #[test]
    fn missing_coefficients_are_reported() {
        let sc = build_treebolic(1, 2.0, 0.0, 1.0, 0, 1, 1.0).unwrap();
        let mut doc = ComplexDocument::from_complex(&sc);
        doc.graph.coefficients.clear();
        let err = doc.to_complex().unwrap_err().to_string();
        assert!(err.contains("coefficients.0"), "{err}");
    }
}
