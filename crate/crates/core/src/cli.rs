//! Command-line interface of the `pprls` binary.
//!
//! Exit status: 0 on success, 2 on usage or configuration errors, 3 on
//! numeric failures (disconnected graphs, empty sweeps, solver breakdown).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::diagnostics::{default_t_max, mixing_time_inf_with, MixingMethod};
use crate::error::{Error, Result};
use crate::experiments::{run_bounds_sweep, run_hard_case, run_two_moons, with_thread_pool, BoundsConfig, HardCaseConfig, MoonsConfig};
use crate::graph::{build_graph, smallest_connecting_radius, NeighborhoodGraph};
use crate::ppr::{appr_push, ppr_cluster, ppr_exact_with, ClusterOptions, PprSolver, SweepVariant, DEFAULT_TOL};
use crate::synthetic::{read_points_csv, Model, RectMixtureParams, RibbonParams, TwoMoonsParams, UniformBoxParams};

#[derive(Debug, Parser)]
#[command(name = "pprls", version, about = "Personalized PageRank clustering on neighborhood graphs")]
pub struct Cli {
    /// Random seed; overrides the seed of experiment configs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (single-output commands) or directory (experiments).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for SVG figures.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a labeled point cloud as CSV.
    Generate(GenerateArgs),
    /// Build an r-neighborhood graph from a point CSV and write its edge list.
    Graph(GraphArgs),
    /// Compute a PPR vector.
    Ppr(PprArgs),
    /// Run PPR followed by the sweep-cut search and print the cluster as JSON.
    Sweep(SweepArgs),
    /// Compute the uniform mixing time of a graph.
    Mixing(MixingArgs),
    /// Bound-tightness sweep on the ribbon density.
    Bounds(ConfigArgs),
    /// Two-moons comparison.
    Moons(ConfigArgs),
    /// Hard-case study on the rectangle mixture.
    Hardcase(ConfigArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelName {
    RectMixture,
    Ribbon,
    TwoMoons,
    UniformBox,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model with default parameters.
    #[arg(long, value_enum, conflicts_with = "config")]
    pub model: Option<ModelName>,
    /// JSON model description, e.g. {"model": "ribbon", "sigma": 0.1}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Point CSV with columns x0..x{d-1} and an optional label column.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long, required_unless_present = "smallest_connected")]
    pub radius: Option<f64>,
    /// Use the smallest radius that connects the points.
    #[arg(long)]
    pub smallest_connected: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Auto,
    FixedPoint,
    ConjugateGradient,
}

impl From<SolverArg> for PprSolver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Auto => PprSolver::Auto,
            SolverArg::FixedPoint => PprSolver::FixedPoint,
            SolverArg::ConjugateGradient => PprSolver::ConjugateGradient,
        }
    }
}

#[derive(Debug, Args)]
pub struct PprArgs {
    /// Edge list written by `pprls graph`.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub seed_vertex: usize,
    #[arg(long)]
    pub alpha: f64,
    /// Use the push approximation with this tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Normalized,
    Unnormalized,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub ppr: PprArgs,
    #[arg(long, default_value_t = 0.0)]
    pub lower: f64,
    #[arg(long, default_value_t = 1.0)]
    pub upper: f64,
    #[arg(long, value_enum, default_value = "normalized")]
    pub variant: VariantArg,
    /// Stationary-probability scale of the unnormalized variant.
    #[arg(long)]
    pub pi0: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Propagation,
    Spectral,
}

#[derive(Debug, Args)]
pub struct MixingArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Step cap; defaults to 50·n.
    #[arg(long)]
    pub t_max: Option<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON config; every field is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = with_thread_pool(|| dispatch(&cli)).and_then(|r| r);
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(io::BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_json_to<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_graph(path: &Path) -> Result<NeighborhoodGraph> {
    NeighborhoodGraph::read_edge_list(BufReader::new(File::open(path)?))
}

/// Reads an experiment config, accepting and checking an optional `"experiment"` tag.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>, tag: &str) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let mut value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(t) = obj.remove("experiment") {
            if t.as_str() != Some(tag) {
                return Err(Error::Parse(format!("config is for experiment {t}, expected \"{tag}\"")));
            }
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn report_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let out_dir = out.unwrap_or(Path::new("."));
    let svg = cli.svg.as_deref();
    match &cli.command {
        Command::Generate(a) => {
            let model: Model = match (&a.config, a.model) {
                (Some(p), _) => serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Parse(e.to_string()))?,
                (None, Some(ModelName::RectMixture)) | (None, None) => Model::RectMixture(RectMixtureParams::default()),
                (None, Some(ModelName::Ribbon)) => Model::Ribbon(RibbonParams::default()),
                (None, Some(ModelName::TwoMoons)) => Model::TwoMoons(TwoMoonsParams::default()),
                (None, Some(ModelName::UniformBox)) => Model::UniformBox(UniformBoxParams::default()),
            };
            let cloud = model.sample(a.n, cli.seed.unwrap_or(0))?;
            let mut w = output(out)?;
            cloud.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Graph(a) => {
            let (points, _) = read_points_csv(File::open(&a.points)?)?;
            let r = match a.radius {
                Some(r) if !a.smallest_connected => r,
                _ => smallest_connecting_radius(&points)?,
            };
            let g = build_graph(&points, r)?;
            let mut w = output(out)?;
            g.write_edge_list(&mut w)?;
            w.flush()?;
        }
        Command::Ppr(a) => {
            let g = read_graph(&a.graph)?;
            let p = match a.epsilon {
                Some(eps) => appr_push(&g, a.seed_vertex, a.alpha, eps)?,
                None => ppr_exact_with(&g, a.seed_vertex, a.alpha, a.tol, a.solver.into())?,
            };
            let mut w = output(out)?;
            p.write_csv(&g, &mut w)?;
            w.flush()?;
        }
        Command::Sweep(a) => {
            let g = read_graph(&a.ppr.graph)?;
            let opts = ClusterOptions {
                alpha: a.ppr.alpha,
                interval: (a.lower, a.upper),
                variant: match a.variant {
                    VariantArg::Normalized => SweepVariant::Normalized,
                    VariantArg::Unnormalized => SweepVariant::Unnormalized,
                },
                pi0: a.pi0,
                epsilon: a.ppr.epsilon,
                tol: a.ppr.tol,
                solver: a.ppr.solver.into(),
            };
            let res = ppr_cluster(&g, a.ppr.seed_vertex, &opts)?;
            write_json_to(out, &res.record())?;
        }
        Command::Mixing(a) => {
            let g = read_graph(&a.graph)?;
            let method = match a.method {
                MethodArg::Auto => MixingMethod::Auto,
                MethodArg::Propagation => MixingMethod::Propagation,
                MethodArg::Spectral => MixingMethod::Spectral,
            };
            let report = mixing_time_inf_with(&g, a.t_max.unwrap_or_else(|| default_t_max(&g)), method)?;
            write_json_to(out, &report)?;
        }
        Command::Bounds(a) => {
            let mut cfg: BoundsConfig = load_config(a.config.as_deref(), "bounds")?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            report_paths(&run_bounds_sweep(&cfg)?.write(out_dir, svg)?);
        }
        Command::Moons(a) => {
            let mut cfg: MoonsConfig = load_config(a.config.as_deref(), "moons")?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            report_paths(&run_two_moons(&cfg)?.write(out_dir, svg)?);
        }
        Command::Hardcase(a) => {
            let mut cfg: HardCaseConfig = load_config(a.config.as_deref(), "hard_case")?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let output = run_hard_case(&cfg)?;
            for case in &output.report.cases {
                for w in &case.warnings {
                    eprintln!("warning: epsilon={} sigma={} rho={}: {w}", case.epsilon, case.sigma, case.rho);
                }
            }
            report_paths(&output.write(out_dir, svg)?);
        }
    }
    Ok(())
}
