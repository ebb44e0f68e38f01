//! Task implementations shared by the subcommands and `run`.

use std::path::Path;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use stripflow_core::acceptance::run_suite;
use stripflow_core::assembly::{node_records, write_discretization};
use stripflow_core::brownian::{exit_distribution, green_estimate, sample_ctmc, sample_sde, EmpiricalMeasure, SdeOptions};
use stripflow_core::heat_engine::{spectral_bottom, HeatPropagator};
use stripflow_core::metric_graph::edge_exhaustion;
use stripflow_core::quotients::{collapse_fiber, compare_with_reference, horocyclic_collapse, slice_plane, QuotientMap};
use stripflow_core::serial::ComplexDocument;
use stripflow_core::strip_complex::{approx_unity, Exhaustion, ThetaCutoff, TreebolicExhaustion};
use stripflow_core::subordination::{circle_fourier_coefficients, resolvent_kernel, KernelFiber, QuadratureSpec};
use stripflow_core::{assemble, BoundaryPolicy, Discretization, Fiber, Grid, Scheme, SpacingRule, StripComplex};

use crate::error::{validation, CliError, CliResult};
use crate::output::{num, opt, Outputs, RunManifest, Table};

/// State threaded through one invocation.
pub struct Ctx {
    pub seed: u64,
    pub out: Outputs,
    pub manifest: RunManifest,
}

fn parse_spacing(s: &str) -> Result<SpacingRule, String> {
    match s {
        "uniform" => Ok(SpacingRule::Uniform),
        "geometric" => Ok(SpacingRule::Geometric),
        other => Err(format!("unknown spacing '{other}' (expected uniform or geometric)")),
    }
}

fn default_reflecting() -> BoundaryPolicy {
    BoundaryPolicy::Reflecting
}

fn default_cn() -> Scheme {
    Scheme::CrankNicolson
}

/// Grid resolution and boundary treatment (the `[discretization]` section).
#[derive(Args, Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationParams {
    /// Nodes per edge including both ends.
    #[arg(long)]
    pub nodes_per_edge: usize,
    /// Nodes across the fiber (1 for a point fiber).
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub fiber_nodes: usize,
    #[arg(long, default_value = "reflecting")]
    #[serde(default = "default_reflecting")]
    pub boundary: BoundaryPolicy,
    /// uniform or geometric; geometric is the default on trees.
    #[arg(long, value_parser = parse_spacing)]
    #[serde(default)]
    pub spacing: Option<SpacingRule>,
}

fn one() -> usize {
    1
}

impl DiscretizationParams {
    pub fn grid(&self, sc: &StripComplex) -> CliResult<Grid> {
        let fiber_nodes = if sc.fiber == Fiber::Point { 1 } else { self.fiber_nodes };
        Ok(match self.spacing {
            Some(rule) => Grid::new(sc, self.nodes_per_edge, fiber_nodes, rule)?,
            None => stripflow_core::build_grid(sc, self.nodes_per_edge, fiber_nodes)?,
        })
    }

    pub fn assemble(&self, sc: &StripComplex) -> CliResult<Discretization> {
        Ok(assemble(sc, &self.grid(sc)?, self.boundary)?)
    }
}

/// Maps a grid node id to its degree of freedom.
pub fn dof_of(d: &Discretization, node: usize) -> CliResult<usize> {
    if node >= d.grid.len() {
        return Err(validation(format!("node {node} does not exist (grid has {} nodes)", d.grid.len())));
    }
    d.dof_of_node[node].ok_or_else(|| validation(format!("node {node} is pinned by the absorbing boundary")))
}

fn dof_table(d: &Discretization, column: (&str, &str), values: &[f64]) -> Table {
    let mut t = Table::new(&[
        ("node_id", "index"),
        ("edge_id", "index"),
        ("s", "length"),
        ("x", "length"),
        ("mass", "measure"),
        column,
    ]);
    for (r, v) in node_records(d).iter().zip(values) {
        t.push(vec![r.node_id.to_string(), opt(r.edge_id), num(r.s), num(r.x), num(d.mass[r.dof]), num(*v)]);
    }
    t
}

fn measure_table(d: &Discretization, m: &EmpiricalMeasure) -> Table {
    let mut t = Table::new(&[("node_id", "index"), ("count", "walkers"), ("density", "per unit measure")]);
    for ((node, count), density) in d.dofs.iter().zip(&m.counts).zip(m.density()) {
        t.push(vec![node.to_string(), count.to_string(), num(density)]);
    }
    t
}

pub fn assemble_task(sc: &StripComplex, params: &DiscretizationParams, ctx: &mut Ctx) -> CliResult<()> {
    let d = params.assemble(sc)?;
    for p in write_discretization(&d, &ctx.out.directory())? {
        ctx.out.record(p);
    }
    println!("assembled {} dofs, {} stiffness entries", d.n_dofs(), d.stiffness.nnz());
    Ok(())
}

#[derive(Args, Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HeatParams {
    /// Grid node carrying the initial point mass.
    #[arg(long)]
    pub source: usize,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub dt: f64,
    /// cn or ie.
    #[arg(long, default_value = "cn")]
    #[serde(default = "default_cn")]
    pub scheme: Scheme,
    /// Implicit Euler half-step pairs before Crank-Nicolson.
    #[arg(long, default_value_t = 2)]
    #[serde(default = "two")]
    pub startup: usize,
}

fn two() -> usize {
    2
}

pub fn heat_task(d: &Discretization, p: &HeatParams, ctx: &mut Ctx) -> CliResult<()> {
    let source = dof_of(d, p.source)?;
    let prop = HeatPropagator::new(d, p.dt, p.scheme)?.with_startup(p.startup);
    let slice = prop.kernels(&[source], p.t)?.remove(0);
    let mass = slice.values.integrate(&d.mass);
    let table = dof_table(d, ("value", "per unit measure"), &slice.values.values);
    let path = ctx.out.primary("kernel.csv");
    ctx.out.write_table(path, &table)?;
    println!("heat kernel at t={} from node {}: total mass {mass:.12}", p.t, p.source);
    Ok(())
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// Boundary policy for the eigenproblem (defaults to the stored one).
    #[arg(long)]
    #[serde(default)]
    pub mode: Option<BoundaryPolicy>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    lambda: f64,
    residual: f64,
    iterations: usize,
    shift: f64,
    policy: BoundaryPolicy,
    n_dofs: usize,
}

pub fn spectrum_task(d: &Discretization, p: &SpectrumParams, ctx: &mut Ctx) -> CliResult<()> {
    let rebuilt;
    let d = match p.mode {
        Some(mode) if mode != d.policy => {
            rebuilt = assemble(&d.complex, &d.grid, mode)?;
            &rebuilt
        }
        _ => d,
    };
    let r = spectral_bottom(d)?;
    let summary = SpectrumSummary { lambda: r.lambda, residual: r.residual, iterations: r.iterations, shift: r.shift, policy: d.policy, n_dofs: d.n_dofs() };
    let path = ctx.out.primary("spectrum.json");
    ctx.out.write_json(path, &summary)?;
    let path = ctx.out.secondary("eigenvector.csv");
    ctx.out.write_table(path, &dof_table(d, ("value", "normalized"), &r.eigenvector))?;
    println!("lambda_0 = {:.10} (residual {:.2e}, {} iterations)", r.lambda, r.residual, r.iterations);
    Ok(())
}

#[derive(Subcommand, Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum McParams {
    /// Exact jump chain of the discretized generator.
    Ctmc {
        #[arg(long)]
        source: usize,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        paths: u64,
    },
    /// Euler-Maruyama with Walsh junction rule, binned onto the grid.
    Sde {
        #[arg(long)]
        source: usize,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        paths: u64,
        #[arg(long, default_value_t = 1e-3)]
        #[serde(default = "default_sde_dt")]
        dt: f64,
    },
    /// First exit from the grid minus the truncation boundary layers.
    Exit {
        #[arg(long)]
        source: usize,
        #[arg(long)]
        paths: u64,
    },
    /// Truncated occupation density of `zeta` at increasing horizons.
    Green {
        #[arg(long)]
        source: usize,
        #[arg(long)]
        zeta: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        #[serde(default = "default_horizons")]
        horizons: Vec<f64>,
        #[arg(long)]
        paths: u64,
    },
}

fn default_sde_dt() -> f64 {
    1e-3
}

fn default_horizons() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

/// DOFs that are not on a boundary vertex layer.
fn interior_region(d: &Discretization) -> Vec<bool> {
    d.dofs
        .iter()
        .map(|&n| match d.grid.location(n) {
            stripflow_core::NodeLocation::Vertex { vertex, .. } => !d.complex.graph.vertices[vertex].boundary,
            _ => true,
        })
        .collect()
}

pub fn mc_task(d: &Discretization, p: &McParams, ctx: &mut Ctx) -> CliResult<()> {
    let seed = ctx.seed;
    match *p {
        McParams::Ctmc { source, t, paths } => {
            let m = sample_ctmc(d, dof_of(d, source)?, t, paths, seed)?;
            write_measure(d, &m, ctx)
        }
        McParams::Sde { source, t, paths, dt } => {
            dof_of(d, source)?;
            let m = sample_sde(d, d.grid.point(source), t, SdeOptions { dt, n_paths: paths, seed })?;
            write_measure(d, &m, ctx)
        }
        McParams::Exit { source, paths } => {
            let law = exit_distribution(d, &interior_region(d), dof_of(d, source)?, paths, seed)?;
            let mut t = Table::new(&[("node_id", "index"), ("count", "walkers"), ("density", "probability")]);
            for (&dof, &count) in &law.hits {
                t.push(vec![d.dofs[dof].to_string(), count.to_string(), num(law.probability(dof))]);
            }
            let path = ctx.out.primary("exit.csv");
            ctx.out.write_table(path, &t)?;
            println!("{} walkers: {} exit nodes, {} killed, {} capped", law.total, law.hits.len(), law.killed, law.capped);
            Ok(())
        }
        McParams::Green { source, zeta, ref horizons, paths } => {
            let g = green_estimate(d, dof_of(d, source)?, dof_of(d, zeta)?, horizons, paths, seed)?;
            let mut t = Table::new(&[("horizon", "time"), ("estimate", "time per unit measure"), ("std_error", "time per unit measure")]);
            for ((h, e), s) in g.horizons.iter().zip(&g.estimates).zip(&g.std_errors) {
                t.push(vec![num(*h), num(*e), num(*s)]);
            }
            let path = ctx.out.primary("green.csv");
            ctx.out.write_table(path, &t)?;
            println!("green estimate: {} walkers, {} alive at the last horizon, final ratio {}", g.n_paths, g.alive, opt(g.final_ratio()));
            Ok(())
        }
    }
}

fn write_measure(d: &Discretization, m: &EmpiricalMeasure, ctx: &mut Ctx) -> CliResult<()> {
    let path = ctx.out.primary("measure.csv");
    ctx.out.write_table(path, &measure_table(d, m))?;
    println!("{} walkers: {} survived, {} killed, {} frozen", m.total, m.survivors(), m.killed, m.frozen);
    Ok(())
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, clap::ValueEnum, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionTarget {
    /// Collapse the fiber onto the tree.
    Tree,
    /// Slice to the weighted hyperbolic plane.
    Plane,
}

#[derive(Subcommand, Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjectParams {
    /// Strip complex to its base graph.
    CollapseFiber,
    /// Treebolic space to the weighted hyperbolic plane.
    SlicePlane,
    /// Tree-built complex to a horocyclic tree with level weights `b`.
    Horocyclic {
        #[arg(long, value_delimiter = ',')]
        b: Vec<f64>,
    },
    /// Projected heat kernel against an intrinsic solve on the target.
    Compare {
        #[arg(long, value_enum, default_value = "tree")]
        #[serde(default = "default_target")]
        target: ProjectionTarget,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        #[serde(default)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 9)]
        #[serde(default = "nine")]
        nodes_per_edge: usize,
        #[arg(long, default_value_t = 5)]
        #[serde(default = "five")]
        fiber_nodes: usize,
        /// Vertex whose middle fiber node is the source.
        #[arg(long, default_value_t = 1)]
        #[serde(default = "one")]
        source_vertex: usize,
    },
}

fn default_target() -> ProjectionTarget {
    ProjectionTarget::Tree
}

fn nine() -> usize {
    9
}

fn five() -> usize {
    5
}

#[derive(Serialize)]
struct CompareSummary {
    target: ProjectionTarget,
    t: f64,
    dt: f64,
    nodes_per_edge: usize,
    fiber_nodes: usize,
    reference_nodes_per_edge: usize,
    rel_l1: f64,
    projected_mass: f64,
    reference_mass: f64,
}

fn write_quotient(target: &StripComplex, map: &QuotientMap, ctx: &mut Ctx) -> CliResult<()> {
    let path = ctx.out.primary("quotient.json");
    ctx.out.write_json(path, map)?;
    let path = ctx.out.secondary("target.json");
    ctx.out.write_json(path, &ComplexDocument::from_complex(target))
}

pub fn project_task(sc: &StripComplex, p: &ProjectParams, ctx: &mut Ctx) -> CliResult<()> {
    match p {
        ProjectParams::CollapseFiber => {
            let (target, map) = collapse_fiber(sc)?;
            write_quotient(&target, &map, ctx)?;
            println!("collapsed fiber: {} edges", map.edges.len());
        }
        ProjectParams::SlicePlane => {
            let (target, map) = slice_plane(sc)?;
            write_quotient(&target, &map, ctx)?;
            println!("sliced to the plane: {} edges map onto {}", map.edges.len(), target.graph.edges.len());
        }
        ProjectParams::Horocyclic { b } => {
            let (target, map, cert) = horocyclic_collapse(sc, b)?;
            write_quotient(&target, &map, ctx)?;
            let path = ctx.out.secondary("certificate.json");
            ctx.out.write_json(path, &cert)?;
            println!("horocyclic collapse: {} conflicting classes", cert.conflicting_classes().len());
        }
        &ProjectParams::Compare { target, t, dt, nodes_per_edge: n, fiber_nodes: m, source_vertex } => {
            let (tgt, map) = match target {
                ProjectionTarget::Tree => collapse_fiber(sc)?,
                ProjectionTarget::Plane => slice_plane(sc)?,
            };
            if n < 2 || m < 1 {
                return Err(validation("compare needs nodes_per_edge >= 2 and fiber_nodes >= 1"));
            }
            let dt = dt.unwrap_or(t / 256.0);
            let tm = |m: usize| if tgt.fiber == Fiber::Point { 1 } else { m };
            let disc = |sc: &StripComplex, n: usize, m: usize| -> CliResult<Discretization> {
                Ok(assemble(sc, &stripflow_core::build_grid(sc, n, m)?, BoundaryPolicy::Reflecting)?)
            };
            let src = disc(sc, n, m)?;
            let coarse = disc(&tgt, n, tm(m))?;
            let fine = disc(&tgt, 4 * n - 3, tm(4 * m - 3))?;
            if source_vertex >= sc.graph.vertices.len() {
                return Err(validation(format!("source_vertex {source_vertex} does not exist")));
            }
            let source = dof_of(&src, src.grid.vertex_node(source_vertex, m / 2))?;
            let r = compare_with_reference(&src, &coarse, &fine, &map, source, t, dt)?;
            let summary = CompareSummary {
                target,
                t,
                dt,
                nodes_per_edge: n,
                fiber_nodes: m,
                reference_nodes_per_edge: 4 * n - 3,
                rel_l1: r.rel_l1,
                projected_mass: r.projected_mass,
                reference_mass: r.reference_mass,
            };
            let path = ctx.out.primary("compare.json");
            ctx.out.write_json(path, &summary)?;
            println!("relative L1 distance {:.4}%", 100.0 * r.rel_l1);
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, clap::ValueEnum, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustionKind {
    /// Flat-near-vertices exhaustion of the base graph.
    Edge,
    /// Scale-periodic exhaustion of a treebolic space.
    Treebolic,
}

#[derive(Args, Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustParams {
    #[arg(long, value_enum)]
    pub kind: ExhaustionKind,
    /// Flat radius around vertices (edge exhaustion).
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Base vertex (edge exhaustion).
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub origin: usize,
    /// Scale of the approximate unity `θ(ρ / n)`; omitted means none.
    #[arg(long)]
    #[serde(default)]
    pub scale: Option<u32>,
}

fn default_epsilon() -> f64 {
    0.05
}

pub fn exhaust_task(sc: &StripComplex, disc: &DiscretizationParams, p: &ExhaustParams, ctx: &mut Ctx) -> CliResult<()> {
    let grid = disc.grid(sc)?;
    let ex: Box<dyn Exhaustion> = match p.kind {
        ExhaustionKind::Edge => Box::new(edge_exhaustion(&sc.graph, p.epsilon, p.origin)?),
        ExhaustionKind::Treebolic => Box::new(TreebolicExhaustion::new(sc)?),
    };
    let rho = (0..grid.len()).map(|i| ex.eval(grid.point(i))).collect::<stripflow_core::Result<Vec<_>>>()?;
    let unity = p.scale.map(|n| approx_unity(&grid, ex.as_ref(), n, ThetaCutoff::default())).transpose()?;
    let mut t = Table::new(&[("node_id", "index"), ("edge_id", "index"), ("s", "length"), ("x", "length"), ("rho", "length"), ("unity", "1")]);
    for (i, r) in rho.iter().enumerate() {
        let (edge, s) = grid.edge_coordinate(i);
        t.push(vec![i.to_string(), opt(edge), num(s), num(grid.x_of(i)), num(*r), opt(unity.as_ref().map(|u| num(u[i])))]);
    }
    let path = ctx.out.primary("exhaustion.csv");
    ctx.out.write_table(path, &t)?;
    let max = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("exhaustion on {} nodes, max {max:.6}", rho.len());
    Ok(())
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, clap::ValueEnum, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    Line,
    Circle,
}

#[derive(Subcommand, Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SubordParams {
    /// Kernel of `(1 + sqrt(-Δ))^{-1}` at `(x, y)` for each `y`.
    #[serde(rename = "G")]
    #[command(name = "G")]
    G {
        #[arg(long, value_enum, default_value = "circle")]
        #[serde(default = "default_circle")]
        fiber: FiberKind,
        /// Circle length.
        #[arg(long = "L", default_value_t = std::f64::consts::TAU)]
        #[serde(default = "tau", rename = "L")]
        length: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, value_delimiter = ',')]
        y: Vec<f64>,
    },
    /// Fourier cosine coefficients of the circle kernel against `1 / (1 + 2π|k|/L)`.
    #[serde(rename = "fourier")]
    Fourier {
        #[arg(long = "L", default_value_t = std::f64::consts::TAU)]
        #[serde(default = "tau", rename = "L")]
        length: f64,
        #[arg(long, default_value_t = 8)]
        #[serde(default = "eight")]
        kmax: usize,
    },
}

fn default_circle() -> FiberKind {
    FiberKind::Circle
}

fn tau() -> f64 {
    std::f64::consts::TAU
}

fn eight() -> usize {
    8
}

pub fn subord_task(p: &SubordParams, ctx: &mut Ctx) -> CliResult<()> {
    let spec = QuadratureSpec::default();
    match p {
        SubordParams::G { fiber, length, x, y } => {
            if y.is_empty() {
                return Err(validation("y: at least one point is required"));
            }
            let kf = match fiber {
                FiberKind::Line => KernelFiber::Line,
                FiberKind::Circle => KernelFiber::Circle { length: *length },
            };
            let mut t = Table::new(&[("x", "length"), ("y", "length"), ("distance", "length"), ("value", "per unit length")]);
            for &yy in y {
                let g = resolvent_kernel(kf, *x, yy, spec)?;
                println!("G({x}, {yy}) = {g:.12}");
                t.push(vec![num(*x), num(yy), num(kf.distance(*x, yy)), num(g)]);
            }
            let path = ctx.out.primary("resolvent.csv");
            ctx.out.write_table(path, &t)?;
        }
        &SubordParams::Fourier { length, kmax } => {
            let c = circle_fourier_coefficients(length, kmax, spec)?;
            let mut t = Table::new(&[("k", "index"), ("coefficient", "1"), ("multiplier", "1"), ("error", "1")]);
            let mut worst: f64 = 0.0;
            for (k, ck) in c.iter().enumerate() {
                let exact = 1.0 / (1.0 + std::f64::consts::TAU * k as f64 / length);
                worst = worst.max((ck - exact).abs());
                t.push(vec![k.to_string(), num(*ck), num(exact), num(ck - exact)]);
            }
            let path = ctx.out.primary("fourier.csv");
            ctx.out.write_table(path, &t)?;
            println!("max |coefficient - multiplier| = {worst:.3e}");
        }
    }
    Ok(())
}

#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptParams {
    /// Criterion ids to run (all when empty).
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub criteria: Vec<usize>,
}

#[derive(Serialize)]
struct AcceptRow {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
    metrics: std::collections::BTreeMap<String, f64>,
}

pub fn accept_task(p: &AcceptParams, ctx: &mut Ctx) -> CliResult<()> {
    let outcomes = run_suite(&p.criteria, ctx.seed)?;
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    let rows: Vec<AcceptRow> = outcomes
        .into_iter()
        .map(|o| AcceptRow { id: o.id, name: o.name, passed: o.passed, detail: o.detail, seconds: o.seconds, metrics: o.metrics })
        .collect();
    let path = ctx.out.primary("acceptance.json");
    ctx.out.write_json(path, &rows)?;
    if failed > 0 {
        return Err(CliError::Acceptance(format!("{failed} criteria failed")));
    }
    Ok(())
}

/// Reads a complex document and records its digest.
pub fn load_space(path: &Path, ctx: &mut Ctx) -> CliResult<StripComplex> {
    ctx.manifest.add_input(path)?;
    let doc: ComplexDocument = stripflow_core::serial::read_json(path).map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
    Ok(doc.to_complex()?)
}

pub fn load_disc(path: &Path, ctx: &mut Ctx) -> CliResult<Discretization> {
    ctx.manifest.add_input(path)?;
    stripflow_core::assembly::read_discretization(path).map_err(|e| CliError::from(e).context(&path.display().to_string()))
}
