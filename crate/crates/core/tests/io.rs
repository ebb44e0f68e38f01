use stripflow_core::assembly::{read_discretization, write_discretization};
use stripflow_core::serial::{read_json, write_json, ComplexDocument, GraphDocument};
use stripflow_core::{
    assemble, build_grid, build_treebolic, BoundaryPolicy, EdgeCoefficients, Error, Fiber, MetricGraph, Profile, StripComplex,
};

#[test]
fn discretization_round_trips_through_triplets_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let sc = build_treebolic(2, 2.0, 1.0, 0.5, -1, 1, 1.0).unwrap();
    let d = assemble(&sc, &build_grid(&sc, 5, 3).unwrap(), BoundaryPolicy::Absorbing).unwrap();
    let files = write_discretization(&d, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    let back = read_discretization(dir.path()).unwrap();
    assert_eq!(back.mass, d.mass);
    assert_eq!(back.stiffness.triplets(), d.stiffness.triplets());
    assert_eq!(back.dofs, d.dofs);
}

#[test]
fn tampered_triplets_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
    let d = assemble(&sc, &build_grid(&sc, 5, 3).unwrap(), BoundaryPolicy::Reflecting).unwrap();
    write_discretization(&d, dir.path()).unwrap();
    let path = dir.path().join("stiffness.txt");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let parts: Vec<&str> = lines[1].split_whitespace().collect();
    lines[1] = format!("{} {} 12345.0", parts[0], parts[1]);
    std::fs::write(&path, lines.join("\n")).unwrap();
    assert!(matches!(read_discretization(dir.path()), Err(Error::Configuration(_))));
}

#[test]
fn general_complex_document_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = MetricGraph::star(&[1.0, 2.0, 0.5]).unwrap();
    let coeffs = vec![
        EdgeCoefficients::from_a_m(Profile::constant(1.0), Profile::constant(2.0), 1).unwrap(),
        EdgeCoefficients::from_a_m(Profile::power(1.0, 1.0, 0.5), Profile::power(1.0, -1.0, 0.5), 1).unwrap(),
        EdgeCoefficients::from_a_m(Profile::constant(3.0), Profile::constant(0.5), 1).unwrap(),
    ];
    let sc = StripComplex::new(g, Fiber::Circle { length: 2.0 }, coeffs).unwrap();
    let path = dir.path().join("complex.json");
    write_json(&path, &ComplexDocument::from_complex(&sc)).unwrap();
    let doc: ComplexDocument = read_json(&path).unwrap();
    let back = doc.to_complex().unwrap();
    assert_eq!(back.coeffs, sc.coeffs);
    assert_eq!(back.fiber, sc.fiber);
    assert_eq!(back.graph.edges, sc.graph.edges);
}

#[test]
fn graph_document_with_a_bad_endpoint_is_rejected() {
    let g = MetricGraph::path(&[1.0, 1.0]).unwrap();
    let mut doc = GraphDocument::from_graph(&g);
    doc.edges[1].head = 7;
    assert!(doc.to_graph().is_err());
}
