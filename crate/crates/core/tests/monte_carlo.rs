use stripflow_core::brownian::{exit_distribution, green_estimate, sample_ctmc, sample_sde, SdeOptions};
use stripflow_core::heat_engine::solve_harmonic;
use stripflow_core::{assemble, build_grid, build_treebolic, BoundaryPolicy, Discretization};

fn treebolic(policy: BoundaryPolicy) -> Discretization {
    let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 1, 1.0).unwrap();
    assemble(&sc, &build_grid(&sc, 5, 5).unwrap(), policy).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn samplers_do_not_depend_on_the_thread_count() {
    let d = treebolic(BoundaryPolicy::Absorbing);
    let run = || {
        let c = sample_ctmc(&d, 12, 0.3, 5000, 11).unwrap();
        let g = green_estimate(&d, 12, 12, &[0.5, 1.0], 3000, 11).unwrap();
        let s = sample_sde(&d, d.grid.point(d.dofs[12]), 0.1, SdeOptions { dt: 0.01, n_paths: 2000, seed: 11 }).unwrap();
        (c, g, s)
    };
    let (a, b) = (in_pool(1, run), in_pool(3, run));
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
}

#[test]
fn seeds_change_the_sample() {
    let d = treebolic(BoundaryPolicy::Reflecting);
    let a = sample_ctmc(&d, 3, 0.3, 2000, 1).unwrap();
    let b = sample_ctmc(&d, 3, 0.3, 2000, 2).unwrap();
    assert_ne!(a.counts, b.counts);
}

#[test]
fn exit_law_reproduces_the_discrete_harmonic_extension() {
    let d = treebolic(BoundaryPolicy::Reflecting);
    let g = &d.complex.graph;
    let mut boundary = Vec::new();
    for v in g.vertices.iter().filter(|v| v.boundary) {
        for j in 0..d.grid.fiber_nodes {
            let node = d.grid.vertex_node(v.id, j);
            boundary.push((node, (v.id as f64).sqrt() + d.grid.x_of(node)));
        }
    }
    let u = solve_harmonic(&d, &boundary).unwrap();
    let mut region = vec![true; d.n_dofs()];
    for &(node, _) in &boundary {
        region[d.dof_of_node[node].unwrap()] = false;
    }
    let source = d.dof_of_node[d.grid.vertex_node(1, 1)].unwrap();
    let law = exit_distribution(&d, &region, source, 40_000, 5).unwrap();
    assert_eq!(law.killed + law.capped, 0);
    let (mean, se) = law.pairing(&d.restrict(&u).unwrap());
    let exact = u[d.dofs[source]];
    assert!((mean - exact).abs() < 4.0 * se + 1e-12, "{mean} vs {exact} (se {se})");
}

#[test]
fn euler_maruyama_law_approaches_the_jump_chain() {
    let d = treebolic(BoundaryPolicy::Reflecting);
    let source = d.dof_of_node[d.grid.vertex_node(1, 2)].unwrap();
    let t = 0.5;
    let chain = sample_ctmc(&d, source, t, 200_000, 1).unwrap();
    let tv = |dt: f64| {
        let s = sample_sde(&d, d.grid.point(d.dofs[source]), t, SdeOptions { dt, n_paths: 200_000, seed: 2 }).unwrap();
        s.total_variation(&chain)
    };
    let (coarse, fine) = (tv(4e-3), tv(2e-3));
    assert!(fine <= 0.05, "{fine}");
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn killed_walkers_are_counted_once() {
    let d = treebolic(BoundaryPolicy::Absorbing);
    let m = sample_ctmc(&d, 12, 2.0, 4000, 9).unwrap();
    assert_eq!(m.survivors() + m.killed, m.total);
    assert!(m.killed > 0);
}
