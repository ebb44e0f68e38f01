use serde::Serialize;

use super::QuotientMap;
use crate::assembly::{Discretization, Grid};
use crate::brownian::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::heat_engine::{HeatPropagator, Scheme};

/// Relative `L¹(μ)` distance between a projected and a reference heat kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub t: f64,
    pub source_dof: usize,
    pub target_dof: usize,
    pub rel_l1: f64,
    /// Total probability carried by the projected kernel.
    pub projected_mass: f64,
    pub reference_mass: f64,
}

fn dof_table(src: &Discretization, tgt: &Discretization, map: &QuotientMap) -> Result<Vec<usize>> {
    map.validate(&src.complex.graph, &tgt.complex.graph)?;
    let nodes = map.node_table(&src.grid, &tgt.grid)?;
    src.dofs
        .iter()
        .map(|&n| {
            tgt.dof_of_node[nodes[n]].ok_or_else(|| {
                Error::Configuration(format!("source node {n} projects onto a pinned target node {}", nodes[n]))
            })
        })
        .collect()
}

/// Pools source probabilities (per DOF) onto the target DOFs.
pub fn aggregate(src: &Discretization, tgt: &Discretization, map: &QuotientMap, probabilities: &[f64]) -> Result<Vec<f64>> {
    if probabilities.len() != src.n_dofs() {
        return Err(Error::Shape { expected: src.n_dofs(), actual: probabilities.len() });
    }
    let table = dof_table(src, tgt, map)?;
    let mut out = vec![0.0; tgt.n_dofs()];
    for (k, &p) in probabilities.iter().enumerate() {
        out[table[k]] += p;
    }
    Ok(out)
}

/// Pools walker counts onto the target DOFs.
pub fn aggregate_counts(src: &Discretization, tgt: &Discretization, map: &QuotientMap, m: &EmpiricalMeasure) -> Result<EmpiricalMeasure> {
    let table = dof_table(src, tgt, map)?;
    let mut counts = vec![0; tgt.n_dofs()];
    for (k, &c) in m.counts.iter().enumerate() {
        counts[table[k]] += c;
    }
    Ok(EmpiricalMeasure { counts, total: m.total, killed: m.killed, frozen: m.frozen, masses: tgt.mass.clone() })
}

/// Probabilities `h(t, source, ·)·m` after evolving a unit point mass.
fn kernel_probabilities(d: &Discretization, source: usize, t: f64, dt: f64) -> Result<Vec<f64>> {
    if source >= d.n_dofs() {
        return Err(Error::Domain(format!("source {source} is not a degree of freedom")));
    }
    let n = (t / dt - 1e-9).ceil().max(1.0);
    let prop = HeatPropagator::new(d, t / n, Scheme::CrankNicolson)?.with_startup(2);
    let mut u0 = vec![0.0; d.n_dofs()];
    u0[source] = 1.0 / d.mass[source];
    let u = prop.run(&u0, n as usize)?;
    Ok(u.iter().zip(&d.mass).map(|(u, m)| u * m).collect())
}

/// Evolves a point mass on the source, pools it through `map`, and compares with the target kernel on the same image grid.
pub fn compare_projected_heat(src: &Discretization, tgt: &Discretization, map: &QuotientMap, source_dof: usize, t: f64, dt: f64) -> Result<ProjectionReport> {
    let table = dof_table(src, tgt, map)?;
    let target_dof = *table.get(source_dof).ok_or_else(|| Error::Domain(format!("source {source_dof} is not a degree of freedom")))?;
    let projected = aggregate(src, tgt, map, &kernel_probabilities(src, source_dof, t, dt)?)?;
    let reference = kernel_probabilities(tgt, target_dof, t, dt)?;
    Ok(report(t, source_dof, target_dof, &projected, &reference))
}

fn report(t: f64, source_dof: usize, target_dof: usize, projected: &[f64], reference: &[f64]) -> ProjectionReport {
    let diff: f64 = projected.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum();
    let reference_mass: f64 = reference.iter().sum();
    ProjectionReport { t, source_dof, target_dof, rel_l1: diff / reference_mass, projected_mass: projected.iter().sum(), reference_mass }
}

/// Grid node of `fine` at the same position as each node of `coarse`.
pub fn coincident_nodes(coarse: &Grid, fine: &Grid) -> Result<Vec<usize>> {
    if coarse.n_edges() != fine.n_edges() || coarse.fiber != fine.fiber {
        return Err(Error::Configuration("grids describe different complexes".into()));
    }
    let find = |values: &[f64], x: f64, scale: f64| -> Result<usize> {
        let k = values.partition_point(|&v| v < x - 1e-9 * scale);
        match values.get(k) {
            Some(v) if (v - x).abs() <= 1e-9 * scale => Ok(k),
            _ => Err(Error::Configuration(format!("coarse node at {x} has no fine counterpart"))),
        }
    };
    let xscale = 1.0 + coarse.fiber.length().unwrap_or(0.0);
    let js = coarse.xs.iter().map(|&x| find(&fine.xs, x, xscale)).collect::<Result<Vec<_>>>()?;
    let mut out = vec![usize::MAX; coarse.len()];
    for e in 0..coarse.n_edges() {
        let scale = 1.0 + coarse.s_nodes[e].last().unwrap();
        for (i, &s) in coarse.s_nodes[e].iter().enumerate() {
            let fi = find(&fine.s_nodes[e], s, scale)?;
            for (j, &fj) in js.iter().enumerate() {
                out[coarse.node(e, i, j)] = fine.node(e, fi, fj);
            }
        }
    }
    Ok(out)
}

/// Projects the source kernel onto the coarse target grid and compares its
/// density with an intrinsic target solve on a finer nested grid.
pub fn compare_with_reference(
    src: &Discretization,
    coarse: &Discretization,
    fine: &Discretization,
    map: &QuotientMap,
    source_dof: usize,
    t: f64,
    dt: f64,
) -> Result<ProjectionReport> {
    let table = dof_table(src, coarse, map)?;
    let target_dof = *table.get(source_dof).ok_or_else(|| Error::Domain(format!("source {source_dof} is not a degree of freedom")))?;
    let projected = aggregate(src, coarse, map, &kernel_probabilities(src, source_dof, t, dt)?)?;
    let nodes = coincident_nodes(&coarse.grid, &fine.grid)?;
    let to_fine = |k: usize| -> Result<usize> {
        fine.dof_of_node[nodes[coarse.dofs[k]]].ok_or_else(|| Error::Configuration("fine grid pins a coarse degree of freedom".into()))
    };
    let fine_source = to_fine(target_dof)?;
    let fine_p = kernel_probabilities(fine, fine_source, t, dt)?;
    // Densities on the coarse nodes, weighted by coarse masses.
    let mut reference = Vec::with_capacity(coarse.n_dofs());
    for k in 0..coarse.n_dofs() {
        let f = to_fine(k)?;
        reference.push(fine_p[f] / fine.mass[f] * coarse.mass[k]);
    }
    Ok(report(t, source_dof, target_dof, &projected, &reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid, BoundaryPolicy};
    use crate::quotients::{collapse_fiber, slice_plane};
    use crate::strip_complex::{build_treebolic, PointOnComplex};

    fn disc(sc: &crate::strip_complex::StripComplex, n: usize, m: usize) -> Discretization {
        assemble(sc, &build_grid(sc, n, m).unwrap(), BoundaryPolicy::Reflecting).unwrap()
    }

    #[test]
    fn identity_projection_has_no_error() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let d = disc(&sc, 5, 5);
        let map = QuotientMap::identity(&sc.graph);
        let r = compare_projected_heat(&d, &d, &map, 3, 0.25, 0.01).unwrap();
        assert!(r.rel_l1 < 1e-8, "{r:?}");
    }

    #[test]
    fn lumped_fiber_collapse_is_exact_on_the_image_grid() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let (q, map) = collapse_fiber(&sc).unwrap();
        let d = disc(&sc, 6, 7);
        let dq = disc(&q, 6, 1);
        let r = compare_projected_heat(&d, &dq, &map, d.dof_of_node[d.grid.vertex_node(1, 3)].unwrap(), 0.3, 0.01).unwrap();
        assert!(r.rel_l1 < 1e-8, "{r:?}");
        assert!((r.projected_mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sliced_plane_projection_is_exact_on_the_image_grid() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let (pl, map) = slice_plane(&sc).unwrap();
        let d = disc(&sc, 5, 5);
        let dp = disc(&pl, 5, 5);
        let r = compare_projected_heat(&d, &dp, &map, 2, 0.3, 0.01).unwrap();
        assert!(r.rel_l1 < 1e-8, "{r:?}");
    }

    #[test]
    fn mismatched_grids_are_a_configuration_error() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let (q, map) = collapse_fiber(&sc).unwrap();
        let d = disc(&sc, 6, 3);
        let dq = disc(&q, 7, 1);
        assert!(matches!(compare_projected_heat(&d, &dq, &map, 0, 0.1, 0.01), Err(Error::Configuration(_))));
    }

    #[test]
    fn coincident_nodes_on_nested_grids() {
        let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
        let c = build_grid(&sc, 5, 3).unwrap();
        let f = build_grid(&sc, 17, 9).unwrap();
        let map = coincident_nodes(&c, &f).unwrap();
        for (n, &m) in map.iter().enumerate() {
            let (a, b) = (c.point(n), f.point(m));
            assert!((a.x() - b.x()).abs() < 1e-12);
            assert_eq!(matches!(a, PointOnComplex::Manifold { .. }), matches!(b, PointOnComplex::Manifold { .. }));
        }
    }
}
