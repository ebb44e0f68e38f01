use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stripflow_core::brownian::sample_ctmc;
use stripflow_core::heat_engine::{spectral_bottom, HeatPropagator};
use stripflow_core::subordination::{resolvent_kernel, KernelFiber, QuadratureSpec};
use stripflow_core::{assemble, build_grid, build_treebolic, BoundaryPolicy, Discretization, Scheme};

fn treebolic_disc(n: usize, m: usize, policy: BoundaryPolicy) -> Discretization {
    let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 2, 1.0).unwrap();
    assemble(&sc, &build_grid(&sc, n, m).unwrap(), policy).unwrap()
}

fn assembly(c: &mut Criterion) {
    let sc = build_treebolic(2, 2.0, 0.0, 1.0, -1, 2, 1.0).unwrap();
    let mut g = c.benchmark_group("assemble");
    for n in [9, 17] {
        let grid = build_grid(&sc, n, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| assemble(&sc, grid, BoundaryPolicy::Reflecting).unwrap())
        });
    }
    g.finish();
}

fn heat(c: &mut Criterion) {
    let d = treebolic_disc(9, 9, BoundaryPolicy::Reflecting);
    let f0: Vec<f64> = (0..d.n_dofs()).map(|i| (i % 7) as f64).collect();
    let prop = HeatPropagator::new(&d, 1e-2, Scheme::CrankNicolson).unwrap();
    c.bench_function("cn_100_steps", |b| b.iter(|| prop.run(black_box(&f0), 100).unwrap()));
    c.bench_function("cn_factorize", |b| b.iter(|| HeatPropagator::new(&d, 1e-2, Scheme::CrankNicolson).unwrap().dt()));
}

fn spectrum(c: &mut Criterion) {
    let d = treebolic_disc(9, 1, BoundaryPolicy::Absorbing);
    c.bench_function("spectral_bottom", |b| b.iter(|| spectral_bottom(&d).unwrap().lambda));
}

fn monte_carlo(c: &mut Criterion) {
    let d = treebolic_disc(5, 5, BoundaryPolicy::Reflecting);
    let source = d.dof_of_node[d.grid.vertex_node(1, 2)].unwrap();
    let mut g = c.benchmark_group("ctmc");
    g.sample_size(10);
    g.bench_function("10k_paths_t1", |b| b.iter(|| sample_ctmc(&d, source, 1.0, 10_000, 7).unwrap()));
    g.finish();
}

fn subordination(c: &mut Criterion) {
    let mut g = c.benchmark_group("resolvent");
    g.sample_size(10);
    g.bench_function("circle_G", |b| {
        b.iter(|| resolvent_kernel(KernelFiber::Circle { length: std::f64::consts::TAU }, 0.0, black_box(1.0), QuadratureSpec::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, assembly, heat, spectrum, monte_carlo, subordination);
criterion_main!(benches);
