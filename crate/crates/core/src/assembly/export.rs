//! Triplet export of an assembled discretization and its JSON sidecar.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{assemble, BoundaryPolicy, Discretization, Grid, SpacingRule};
use crate::error::{Error, Result};
use crate::serial::{read_json, write_json, ComplexDocument};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeRecord {
    pub dof: usize,
    pub node_id: usize,
    pub edge_id: Option<usize>,
    pub vertex_id: Option<usize>,
    pub s: f64,
    pub x: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscretizationSidecar {
    pub nodes_per_edge: usize,
    pub fiber_nodes: usize,
    pub spacing: SpacingRule,
    pub policy: BoundaryPolicy,
    pub n_dofs: usize,
    pub nnz: usize,
    pub masses: Vec<f64>,
    pub nodes: Vec<NodeRecord>,
    pub complex: ComplexDocument,
}

pub const STIFFNESS_FILE: &str = "stiffness.txt";
pub const SIDECAR_FILE: &str = "discretization.json";

pub fn node_records(d: &Discretization) -> Vec<NodeRecord> {
    d.dofs
        .iter()
        .enumerate()
        .map(|(dof, &node)| {
            let (edge_id, vertex_id, s) = match d.grid.location(node) {
                super::NodeLocation::Vertex { vertex, .. } => (None, Some(vertex), 0.0),
                super::NodeLocation::Edge { edge, i, .. } => (Some(edge), None, d.grid.s_nodes[edge][i]),
            };
            NodeRecord { dof, node_id: node, edge_id, vertex_id, s, x: d.grid.x_of(node) }
        })
        .collect()
}

/// Writes `stiffness.txt` (one `row col value` line per entry) and `discretization.json`.
pub fn write_discretization(d: &Discretization, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut text = String::new();
    writeln!(text, "% stiffness {} {} {}", d.n_dofs(), d.n_dofs(), d.stiffness.nnz()).expect("string write");
    for (i, j, v) in d.stiffness.triplets() {
        writeln!(text, "{i} {j} {v:.17e}").expect("string write");
    }
    let k_path = dir.join(STIFFNESS_FILE);
    std::fs::write(&k_path, text)?;
    let sidecar = DiscretizationSidecar {
        nodes_per_edge: d.grid.nodes_per_edge,
        fiber_nodes: d.grid.fiber_nodes,
        spacing: d.grid.spacing,
        policy: d.policy,
        n_dofs: d.n_dofs(),
        nnz: d.stiffness.nnz(),
        masses: d.mass.clone(),
        nodes: node_records(d),
        complex: ComplexDocument::from_complex(&d.complex),
    };
    let s_path = dir.join(SIDECAR_FILE);
    write_json(&s_path, &sidecar)?;
    Ok(vec![k_path, s_path])
}

/// Rebuilds a discretization from its sidecar and checks it against the stored triplets.
pub fn read_discretization(dir: &Path) -> Result<Discretization> {
    let sidecar: DiscretizationSidecar = read_json(&dir.join(SIDECAR_FILE))?;
    let sc = sidecar.complex.to_complex()?;
    let grid = Grid::new(&sc, sidecar.nodes_per_edge, sidecar.fiber_nodes, sidecar.spacing)?;
    let d = assemble(&sc, &grid, sidecar.policy)?;
    let text = std::fs::read_to_string(dir.join(STIFFNESS_FILE))?;
    let mut count = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.starts_with('%') || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse_err = || Error::Configuration(format!("{STIFFNESS_FILE}:{}: malformed triplet", lineno + 1));
        if parts.len() != 3 {
            return Err(parse_err());
        }
        let i: usize = parts[0].parse().map_err(|_| parse_err())?;
        let j: usize = parts[1].parse().map_err(|_| parse_err())?;
        let v: f64 = parts[2].parse().map_err(|_| parse_err())?;
        if i >= d.n_dofs() || j >= d.n_dofs() {
            return Err(parse_err());
        }
        let expected = d.stiffness.get(i, j);
        if (expected - v).abs() > 1e-12 * expected.abs().max(1e-300) {
            return Err(Error::Configuration(format!(
                "{STIFFNESS_FILE}:{}: entry ({i},{j}) = {v} does not match the rebuilt value {expected}",
                lineno + 1
            )));
        }
        count += 1;
    }
    if count != d.stiffness.nnz() || sidecar.n_dofs != d.n_dofs() {
        return Err(Error::Configuration(format!(
            "stored matrix has {count} entries and {} DOFs; rebuilt has {} and {}",
            sidecar.n_dofs,
            d.stiffness.nnz(),
            d.n_dofs()
        )));
    }
    Ok(d)
}
