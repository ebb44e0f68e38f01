use stripflow_core::heat_engine::HeatPropagator;
use stripflow_core::quotients::{aggregate, check_weight_compatibility, collapse_fiber, horocyclic_collapse, horocyclic_tree, slice_plane, QuotientMap};
use stripflow_core::{assemble, build_grid, build_treebolic, BoundaryPolicy, Discretization, Scheme, StripComplex};

fn disc(sc: &StripComplex, n: usize, m: usize) -> Discretization {
    assemble(sc, &build_grid(sc, n, m).unwrap(), BoundaryPolicy::Reflecting).unwrap()
}

fn evolve(d: &Discretization, f: &[f64], steps: usize) -> Vec<f64> {
    HeatPropagator::new(d, 0.01, Scheme::CrankNicolson).unwrap().run(f, steps).unwrap()
}

#[test]
fn fiber_collapse_commutes_with_the_flow_for_every_time() {
    let sc = build_treebolic(2, 2.0, 1.0, 0.5, -1, 1, 1.0).unwrap();
    let (tree, map) = collapse_fiber(&sc).unwrap();
    let d = disc(&sc, 7, 6);
    let dt = disc(&tree, 7, 1);
    let mut p0 = vec![0.0; d.n_dofs()];
    p0[17] = 1.0;
    let q0 = aggregate(&d, &dt, &map, &p0).unwrap();
    for steps in [5, 20] {
        // evolve densities, compare probabilities
        let u = evolve(&d, &p0.iter().zip(&d.mass).map(|(p, m)| p / m).collect::<Vec<_>>(), steps);
        let v = evolve(&dt, &q0.iter().zip(&dt.mass).map(|(p, m)| p / m).collect::<Vec<_>>(), steps);
        let pu: Vec<f64> = u.iter().zip(&d.mass).map(|(u, m)| u * m).collect();
        let projected = aggregate(&d, &dt, &map, &pu).unwrap();
        for (a, b) in projected.iter().zip(v.iter().zip(&dt.mass).map(|(v, m)| v * m)) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn sliced_plane_has_the_tree_weight_in_its_parameter() {
    let sc = build_treebolic(3, 2.0, 0.5, 0.7, -1, 1, 1.0).unwrap();
    let (plane, map) = slice_plane(&sc).unwrap();
    let params = plane.treebolic.unwrap();
    assert_eq!(params.p, 1);
    assert!((params.beta - 2.1).abs() < 1e-14);
    map.validate(&sc.graph, &plane.graph).unwrap();
    let cert = check_weight_compatibility(&sc, &plane, &map).unwrap();
    assert!(cert.ok, "{:?}", cert.violations);
}

#[test]
fn quotient_map_survives_json() {
    let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
    let (_, map) = slice_plane(&sc).unwrap();
    let text = serde_json::to_string(&map).unwrap();
    assert!(text.contains("\"A\""));
    let back: QuotientMap = serde_json::from_str(&text).unwrap();
    assert_eq!(back.edges, map.edges);
    assert_eq!(back.vertices, map.vertices);
    assert_eq!(back.factors, map.factors);
}

#[test]
fn horocyclic_projection_commutes_with_the_flow() {
    let b = [1.0, 0.5, 2.0, 1.5];
    let sc = horocyclic_tree(2, 2.0, -2, 2, &b).unwrap();
    let (line, map, cert) = horocyclic_collapse(&sc, &b).unwrap();
    assert!(cert.ok);
    let d = disc(&sc, 6, 1);
    let dl = disc(&line, 6, 1);
    let mut f = vec![0.0; d.n_dofs()];
    f[9] = 1.0 / d.mass[9];
    let u = evolve(&d, &f, 25);
    let mut g = vec![0.0; dl.n_dofs()];
    let p0 = aggregate(&d, &dl, &map, &f.iter().zip(&d.mass).map(|(f, m)| f * m).collect::<Vec<_>>()).unwrap();
    for (k, p) in p0.iter().enumerate() {
        g[k] = p / dl.mass[k];
    }
    let v = evolve(&dl, &g, 25);
    let projected = aggregate(&d, &dl, &map, &u.iter().zip(&d.mass).map(|(u, m)| u * m).collect::<Vec<_>>()).unwrap();
    for (a, (v, m)) in projected.iter().zip(v.iter().zip(&dl.mass)) {
        assert!((a - v * m).abs() < 1e-12, "{a} vs {}", v * m);
    }
}
