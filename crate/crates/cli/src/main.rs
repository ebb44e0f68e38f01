//! `stripflow`: build strip complexes, discretize them, and run heat, Monte
//! Carlo, projection, exhaustion and subordination experiments.

mod config;
mod error;
mod output;
mod tasks;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use stripflow_core::metric_graph::MetricGraph;
use stripflow_core::quotients::horocyclic_tree;
use stripflow_core::serial::{ComplexDocument, GraphDocument};
use stripflow_core::strip_complex::{build_tree_complex, build_treebolic, treebolic_exhaustion};
use stripflow_core::{build_tree, Fiber, PointOnComplex, StripComplex};

use crate::config::Experiment;
use crate::error::{validation, CliError, CliResult};
use crate::output::{Outputs, RunManifest};
use crate::tasks::*;

#[derive(Parser)]
#[command(name = "stripflow", version, about = "Heat flow and Brownian motion on strip complexes")]
struct Cli {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file or directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build metric graphs.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Build strip complexes and evaluate exhaustion functions.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Discretize a complex into a triplet matrix and sidecar.
    Assemble {
        #[arg(long)]
        space: PathBuf,
        #[command(flatten)]
        params: DiscretizationParams,
    },
    /// Heat kernel from a grid node.
    Heat {
        #[arg(long)]
        disc: PathBuf,
        #[command(flatten)]
        params: HeatParams,
    },
    /// Bottom of the spectrum.
    Spectrum {
        #[arg(long)]
        disc: PathBuf,
        #[command(flatten)]
        params: SpectrumParams,
    },
    /// Monte Carlo samplers.
    Mc {
        #[arg(long, global = true)]
        disc: Option<PathBuf>,
        #[command(subcommand)]
        params: McParams,
    },
    /// Quotient maps and projected heat flow.
    Project {
        #[arg(long, global = true)]
        space: Option<PathBuf>,
        #[command(subcommand)]
        params: ProjectParams,
    },
    /// Exhaustion functions and approximate unities on grid nodes.
    Exhaust {
        #[arg(long)]
        space: PathBuf,
        #[command(flatten)]
        grid: DiscretizationParams,
        #[command(flatten)]
        params: ExhaustParams,
    },
    /// Subordinated resolvent kernels on a fiber.
    #[command(subcommand)]
    Subord(SubordParams),
    /// Run the acceptance criteria and print a PASS/FAIL table.
    Accept(AcceptParams),
    /// Run an experiment described by a TOML document.
    Run {
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Truncated tree T_{p,q} between levels kmin and kmax.
    BuildTree(TreeArgs),
    /// Path with the given edge lengths.
    Path {
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<f64>,
    },
    /// Star with the given edge lengths.
    Star {
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<f64>,
    },
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: f64,
    #[arg(long, allow_hyphen_values = true)]
    kmin: i32,
    #[arg(long, allow_hyphen_values = true)]
    kmax: i32,
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Truncated treebolic space with measure weights (alpha, beta).
    BuildTreebolic {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Half-width R of the fiber [-R, R].
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
    },
    /// The tree with the same level densities and a point fiber.
    BuildTree {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Tree with level weights b_k (one per level above kmin) and a point fiber.
    BuildHorocyclic {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<f64>,
    },
    /// Unweighted strips over a graph document.
    Flat {
        #[arg(long)]
        graph: PathBuf,
        /// point, circle or interval.
        #[arg(long, default_value = "point")]
        fiber: String,
        #[arg(long = "L", default_value_t = 1.0)]
        length: f64,
    },
    /// Treebolic exhaustion at a point: `vertex=V,x=X` or `edge=E,s=S,x=X`.
    Exhaustion {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

fn parse_point(text: &str) -> CliResult<PointOnComplex> {
    let mut vertex = None;
    let mut edge = None;
    let (mut s, mut x) = (None, 0.0);
    for part in text.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| validation(format!("point: expected key=value, got '{part}'")))?;
        let bad = |_| validation(format!("point.{key}: cannot parse '{value}'"));
        match key.trim() {
            "vertex" => vertex = Some(value.trim().parse::<usize>().map_err(|_| bad(()))?),
            "edge" => edge = Some(value.trim().parse::<usize>().map_err(|_| bad(()))?),
            "s" => s = Some(value.trim().parse::<f64>().map_err(|_| bad(()))?),
            "x" => x = value.trim().parse::<f64>().map_err(|_| bad(()))?,
            other => return Err(validation(format!("point.{other}: unknown key"))),
        }
    }
    match (vertex, edge, s) {
        (Some(vertex), None, None) => Ok(PointOnComplex::Manifold { vertex, x }),
        (None, Some(edge), Some(s)) => Ok(PointOnComplex::Strip { edge, s, x }),
        _ => Err(validation("point: give either vertex=V or edge=E,s=S (plus x=X)")),
    }
}

fn parse_fiber(kind: &str, length: f64) -> CliResult<Fiber> {
    match kind {
        "point" => Ok(Fiber::Point),
        "circle" => Ok(Fiber::Circle { length }),
        "interval" => Ok(Fiber::Interval { length }),
        other => Err(validation(format!("fiber: unknown kind '{other}' (expected point, circle or interval)"))),
    }
}

fn write_graph(g: &MetricGraph, ctx: &mut Ctx) -> CliResult<()> {
    let path = ctx.out.primary("graph.json");
    ctx.out.write_json(path, &GraphDocument::from_graph(g))?;
    println!("graph with {} vertices and {} edges", g.vertices.len(), g.edges.len());
    Ok(())
}

fn write_space(sc: &StripComplex, ctx: &mut Ctx) -> CliResult<()> {
    let path = ctx.out.primary("space.json");
    ctx.out.write_json(path, &ComplexDocument::from_complex(sc))?;
    println!("complex with {} strips, total measure {:.6}", sc.graph.edges.len(), sc.total_measure());
    Ok(())
}

fn required(path: &Option<PathBuf>, flag: &str) -> CliResult<PathBuf> {
    path.clone().ok_or_else(|| validation(format!("--{flag} is required")))
}

fn execute(command: &Command, ctx: &mut Ctx) -> CliResult<()> {
    match command {
        Command::Graph(GraphCmd::BuildTree(t)) => write_graph(&build_tree(t.p, t.q, t.kmin, t.kmax)?, ctx),
        Command::Graph(GraphCmd::Path { lengths }) => write_graph(&MetricGraph::path(lengths)?, ctx),
        Command::Graph(GraphCmd::Star { lengths }) => write_graph(&MetricGraph::star(lengths)?, ctx),
        Command::Space(SpaceCmd::BuildTreebolic { tree: t, alpha, beta, half_width }) => {
            write_space(&build_treebolic(t.p, t.q, *alpha, *beta, t.kmin, t.kmax, *half_width)?, ctx)
        }
        Command::Space(SpaceCmd::BuildTree { tree: t, alpha, beta }) => {
            write_space(&build_tree_complex(t.p, t.q, *alpha, *beta, t.kmin, t.kmax)?, ctx)
        }
        Command::Space(SpaceCmd::BuildHorocyclic { tree: t, b }) => write_space(&horocyclic_tree(t.p, t.q, t.kmin, t.kmax, b)?, ctx),
        Command::Space(SpaceCmd::Flat { graph, fiber, length }) => {
            ctx.manifest.add_input(graph)?;
            let doc: GraphDocument = stripflow_core::serial::read_json(graph)?;
            write_space(&StripComplex::flat(doc.to_graph()?, parse_fiber(fiber, *length)?)?, ctx)
        }
        Command::Space(SpaceCmd::Exhaustion { space, point }) => {
            let sc = load_space(space, ctx)?;
            let xi = parse_point(point)?;
            let value = treebolic_exhaustion(&sc, xi)?;
            println!("{value}");
            let path = ctx.out.primary("exhaustion.json");
            ctx.out.write_json(path, &serde_json::json!({ "point": xi, "value": value }))
        }
        Command::Assemble { space, params } => {
            let sc = load_space(space, ctx)?;
            assemble_task(&sc, params, ctx)
        }
        Command::Heat { disc, params } => {
            let d = load_disc(disc, ctx)?;
            heat_task(&d, params, ctx)
        }
        Command::Spectrum { disc, params } => {
            let d = load_disc(disc, ctx)?;
            spectrum_task(&d, params, ctx)
        }
        Command::Mc { disc, params } => {
            let d = load_disc(&required(disc, "disc")?, ctx)?;
            mc_task(&d, params, ctx)
        }
        Command::Project { space, params } => {
            let sc = load_space(&required(space, "space")?, ctx)?;
            project_task(&sc, params, ctx)
        }
        Command::Exhaust { space, grid, params } => {
            let sc = load_space(space, ctx)?;
            exhaust_task(&sc, grid, params, ctx)
        }
        Command::Subord(params) => subord_task(params, ctx),
        Command::Accept(params) => accept_task(params, ctx),
        Command::Run { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| validation(format!("{}: {e}", config.display())))?;
            let exp = Experiment::parse(&text)?;
            ctx.manifest.config_digest = Some(output::sha256_file(config)?);
            ctx.manifest.add_input(config)?;
            if let Some(seed) = exp.seed {
                ctx.seed = seed;
                ctx.manifest.seed = seed;
            }
            let base = config.parent().map(PathBuf::from).unwrap_or_default();
            exp.run(&base, ctx)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("validation error: --threads: {e}");
            std::process::exit(2);
        }
    }
    let mut ctx = Ctx { seed: cli.seed, out: Outputs::new(&cli.out), manifest: RunManifest::new(cli.seed, cli.threads) };
    let result = execute(&cli.command, &mut ctx);
    // The manifest is written for failed acceptance runs too, since their table is an output.
    let keep = matches!(result, Ok(()) | Err(CliError::Acceptance(_)));
    if keep && !ctx.out.written().is_empty() {
        let path = ctx.out.manifest_path();
        let written = ctx.manifest.finish(&ctx.out, start.elapsed().as_secs_f64()).and_then(|_| {
            let manifest = std::mem::replace(&mut ctx.manifest, RunManifest::new(0, None));
            ctx.out.write_json(path, &manifest)
        });
        if let Err(e) = written {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
