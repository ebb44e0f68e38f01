use std::collections::VecDeque;

use super::SpdSolver;
use crate::assembly::Discretization;
use crate::error::{Error, Result};

/// Discrete Dirichlet problem on the grid nodes: `K_II u_I = −K_IB u_B`.
///
/// `boundary` lists `(grid node, value)` pairs; every other node is interior.
/// Returns values on all grid nodes.
pub fn solve_harmonic(d: &Discretization, boundary: &[(usize, f64)]) -> Result<Vec<f64>> {
    let n = d.grid.len();
    if boundary.is_empty() {
        return Err(Error::Configuration("harmonic problem needs a nonempty boundary set".into()));
    }
    let mut fixed = vec![None; n];
    for &(node, value) in boundary {
        if node >= n {
            return Err(Error::Domain(format!("boundary node {node} outside the grid ({n} nodes)")));
        }
        fixed[node] = Some(value);
    }
    let interior: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut u: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
    if interior.is_empty() {
        return Ok(u);
    }
    check_components(d, &fixed, &interior)?;
    let k = &d.full_stiffness;
    let rhs: Vec<f64> = interior
        .iter()
        .map(|&i| -k.row(i).filter_map(|(j, v)| fixed[j].map(|b| v * b)).sum::<f64>())
        .collect();
    let kii = k.restrict(&interior);
    let solver = SpdSolver::new(&kii, 1.0, &vec![0.0; interior.len()])?;
    let (x, _) = solver.solve(&rhs)?;
    for (&i, v) in interior.iter().zip(x) {
        u[i] = v;
    }
    Ok(u)
}

/// Every connected component of the interior must touch the boundary.
fn check_components(d: &Discretization, fixed: &[Option<f64>], interior: &[usize]) -> Result<()> {
    let n = fixed.len();
    let mut seen = vec![false; n];
    for &start in interior {
        if seen[start] {
            continue;
        }
        let mut touches = false;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            for (j, v) in d.full_stiffness.row(i) {
                if j == i || v == 0.0 {
                    continue;
                }
                if fixed[j].is_some() {
                    touches = true;
                } else if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if !touches {
            return Err(Error::Configuration(format!(
                "interior component containing node {start} has no boundary node; the problem is singular"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_grid, BoundaryPolicy};
    use crate::metric_graph::MetricGraph;
    use crate::strip_complex::{Fiber, StripComplex};

    fn star() -> Discretization {
        let sc = StripComplex::flat(MetricGraph::star(&[1.0, 1.0, 1.0]).unwrap(), Fiber::Point).unwrap();
        let grid = build_grid(&sc, 5, 1).unwrap();
        assemble(&sc, &grid, BoundaryPolicy::Reflecting).unwrap()
    }

    #[test]
    fn three_resistor_star() {
        let d = star();
        let u = solve_harmonic(&d, &[(1, 0.0), (2, 0.0), (3, 1.0)]).unwrap();
        assert!((u[0] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_data_gives_constants() {
        let d = star();
        let u = solve_harmonic(&d, &[(1, 2.5), (2, 2.5), (3, 2.5)]).unwrap();
        assert!(u.iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn isolated_interior_is_rejected() {
        let d = star();
        assert!(solve_harmonic(&d, &[]).is_err());
    }
}
