//! Experiment documents for `stripflow run`.
//!
//! ```toml
//! seed = 7
//!
//! [space]
//! kind = "treebolic"
//! p = 2
//! q = 2.0
//! alpha = 0.0
//! beta = 1.0
//! k_min = -1
//! k_max = 1
//! half_width = 1.0
//!
//! [discretization]
//! nodes_per_edge = 9
//! fiber_nodes = 9
//! boundary = "reflecting"
//!
//! [task]
//! name = "heat"
//!
//! [task.params]
//! source = 3
//! t = 0.5
//! dt = 0.005
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use stripflow_core::strip_complex::{build_tree_complex, build_treebolic};
use stripflow_core::StripComplex;

use crate::error::{validation, CliResult};
use crate::tasks::{
    accept_task, assemble_task, exhaust_task, heat_task, mc_task, project_task, spectrum_task, subord_task, AcceptParams, Ctx,
    DiscretizationParams, ExhaustParams, HeatParams, McParams, ProjectParams, SpectrumParams, SubordParams,
};

pub const TASKS: [&str; 8] = ["assemble", "heat", "spectrum", "mc", "project", "exhaust", "subord", "acceptance"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    space: Option<toml::Value>,
    #[serde(default)]
    discretization: Option<toml::Value>,
    task: RawTask,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    name: String,
    #[serde(default)]
    params: Option<toml::Value>,
}

/// The `[space]` section.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Treebolic { p: usize, q: f64, alpha: f64, beta: f64, k_min: i32, k_max: i32, half_width: f64 },
    /// The tree alone with the same level densities.
    Tree { p: usize, q: f64, alpha: f64, beta: f64, k_min: i32, k_max: i32 },
    /// A complex document on disk, relative to the config file.
    File { path: PathBuf },
}

#[derive(Debug)]
pub enum Task {
    Assemble,
    Heat(HeatParams),
    Spectrum(SpectrumParams),
    Mc(McParams),
    Project(ProjectParams),
    Exhaust(ExhaustParams),
    Subord(SubordParams),
    Acceptance(AcceptParams),
}

#[derive(Debug)]
pub struct Experiment {
    pub seed: Option<u64>,
    pub space: Option<SpaceSpec>,
    pub discretization: Option<DiscretizationParams>,
    pub task: Task,
}

fn section<T: DeserializeOwned>(prefix: &str, value: toml::Value) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        validation(format!("{at}: {}", e.into_inner()))
    })
}

fn empty_table() -> toml::Value {
    toml::Value::Table(Default::default())
}

impl Experiment {
    pub fn parse(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| validation(format!("config syntax: {}", e.message())))?;
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            validation(format!("{path}: {}", e.into_inner().message()))
        })?;
        let params = raw.task.params.unwrap_or_else(empty_table);
        let task = match raw.task.name.as_str() {
            "assemble" => Task::Assemble,
            "heat" => Task::Heat(section("task.params", params)?),
            "spectrum" => Task::Spectrum(section("task.params", params)?),
            "mc" => Task::Mc(section("task.params", params)?),
            "project" => Task::Project(section("task.params", params)?),
            "exhaust" => Task::Exhaust(section("task.params", params)?),
            "subord" => Task::Subord(section("task.params", params)?),
            "acceptance" => Task::Acceptance(section("task.params", params)?),
            other => return Err(validation(format!("task.name: unknown task '{other}' (expected one of {})", TASKS.join(", ")))),
        };
        let space = raw.space.map(|v| section("space", v)).transpose()?;
        let discretization = raw.discretization.map(|v| section("discretization", v)).transpose()?;
        let exp = Experiment { seed: raw.seed, space, discretization, task };
        exp.check_sections()?;
        Ok(exp)
    }

    fn check_sections(&self) -> CliResult<()> {
        let (needs_space, needs_disc) = match self.task {
            Task::Assemble | Task::Heat(_) | Task::Spectrum(_) | Task::Mc(_) | Task::Exhaust(_) => (true, true),
            Task::Project(_) => (true, false),
            Task::Subord(_) | Task::Acceptance(_) => (false, false),
        };
        if needs_space && self.space.is_none() {
            return Err(validation("space: section is required by this task"));
        }
        if needs_disc && self.discretization.is_none() {
            return Err(validation("discretization: section is required by this task"));
        }
        Ok(())
    }

    fn build_space(&self, base: &Path, ctx: &mut Ctx) -> CliResult<StripComplex> {
        let spec = self.space.as_ref().ok_or_else(|| validation("space: missing"))?;
        let sc = match spec {
            &SpaceSpec::Treebolic { p, q, alpha, beta, k_min, k_max, half_width } => {
                build_treebolic(p, q, alpha, beta, k_min, k_max, half_width)
            }
            &SpaceSpec::Tree { p, q, alpha, beta, k_min, k_max } => build_tree_complex(p, q, alpha, beta, k_min, k_max),
            SpaceSpec::File { path } => return crate::tasks::load_space(&base.join(path), ctx),
        };
        sc.map_err(|e| crate::error::CliError::from(e).context("space"))
    }

    /// Executes the task, writing into `ctx.out`.
    pub fn run(&self, base: &Path, ctx: &mut Ctx) -> CliResult<()> {
        let disc = || self.discretization.as_ref().ok_or_else(|| validation("discretization: missing"));
        match &self.task {
            Task::Assemble => assemble_task(&self.build_space(base, ctx)?, disc()?, ctx),
            Task::Heat(p) => heat_task(&disc()?.assemble(&self.build_space(base, ctx)?)?, p, ctx),
            Task::Spectrum(p) => spectrum_task(&disc()?.assemble(&self.build_space(base, ctx)?)?, p, ctx),
            Task::Mc(p) => mc_task(&disc()?.assemble(&self.build_space(base, ctx)?)?, p, ctx),
            Task::Project(p) => project_task(&self.build_space(base, ctx)?, p, ctx),
            Task::Exhaust(p) => exhaust_task(&self.build_space(base, ctx)?, disc()?, p, ctx),
            Task::Subord(p) => subord_task(p, ctx),
            Task::Acceptance(p) => accept_task(p, ctx),
        }
        .map_err(|e| e.context(&format!("task '{}'", self.task_name())))
    }

    pub fn task_name(&self) -> &'static str {
        match self.task {
            Task::Assemble => "assemble",
            Task::Heat(_) => "heat",
            Task::Spectrum(_) => "spectrum",
            Task::Mc(_) => "mc",
            Task::Project(_) => "project",
            Task::Exhaust(_) => "exhaust",
            Task::Subord(_) => "subord",
            Task::Acceptance(_) => "acceptance",
        }
    }
}
