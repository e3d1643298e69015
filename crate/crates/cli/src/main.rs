//! `shotcans`: benchmark harness for latency-aware adaptive shot
//! allocation.  Subcommands: `run` one (task, optimizer, seed) cell,
//! `sweep` a grid of cells, `summarize` a sweep manifest.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use shotcans::clock::LatencyModel;
use shotcans::optimize::{Budget, OptimizerKind};
use shotcans_cli::error::CliError;
use shotcans_cli::runner::{run_sweep, run_to_file, Overrides, RunPlan};
use shotcans_cli::summary::{render_table, summarize, Metric};
use shotcans_cli::task::{SamplingSpec, TaskSpec};

#[derive(Parser)]
#[command(name = "shotcans", version, about = "Adaptive shot-allocation benchmark harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one (task, optimizer, seed) cell and write its trace.
    Run(RunArgs),
    /// Run a grid of (optimizer, seed) cells and write traces + manifest.
    Sweep(SweepArgs),
    /// Compute median curves and a time-to-threshold table from a manifest.
    Summarize(SummarizeArgs),
}

#[derive(Args, Clone)]
struct TaskArgs {
    /// Task family: compile | tfim | hamiltonian-file.
    #[arg(long)]
    task: String,
    /// Qubit count (compile, tfim).
    #[arg(long)]
    n: Option<usize>,
    /// Ansatz depth.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Target-state seed (compile).
    #[arg(long, default_value_t = 0)]
    task_seed: u64,
    /// Ising coupling J (tfim).
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Transverse field g (tfim).
    #[arg(long, default_value_t = 1.5)]
    g: f64,
    /// Hamiltonian JSON path (hamiltonian-file).
    #[arg(long)]
    path: Option<PathBuf>,
}

impl TaskArgs {
    fn to_spec(&self) -> Result<TaskSpec, CliError> {
        match self.task.as_str() {
            "compile" => Ok(TaskSpec::Compile {
                n: self.n.ok_or_else(|| CliError::Config("compile task needs --n".into()))?,
                depth: self.depth,
                task_seed: self.task_seed,
            }),
            "tfim" => Ok(TaskSpec::Tfim {
                n: self.n.ok_or_else(|| CliError::Config("tfim task needs --n".into()))?,
                depth: self.depth,
                j: self.j,
                g: self.g,
            }),
            "hamiltonian-file" => {
                let path = self
                    .path
                    .clone()
                    .ok_or_else(|| CliError::Config("hamiltonian-file task needs --path".into()))?;
                if self.n.is_some() {
                    return Err(CliError::Config(
                        "hamiltonian-file takes its qubit count from the file; drop --n".into(),
                    ));
                }
                Ok(TaskSpec::HamiltonianFile { path, depth: self.depth })
            }
            other => Err(CliError::Config(format!(
                "unknown task '{other}' (expected compile, tfim, or hamiltonian-file)"
            ))),
        }
    }
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Latency profile: builtin name (superconducting, braket-rigetti,
    /// free) or a JSON file {c1, c2, c3, unit}.
    #[arg(long, default_value = "superconducting")]
    latency: String,
    /// Optional pricing profile for the economic-cost accumulator (same
    /// format as --latency).
    #[arg(long)]
    pricing: Option<String>,
    /// Shot distribution: wrs | group-weighted | exact.
    #[arg(long, default_value = "wrs")]
    sampling: String,
    /// Master seed mixed with (optimizer, seed index) into run streams.
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    /// Budget in simulated seconds.
    #[arg(long)]
    budget_time: Option<f64>,
    /// Budget in economic-cost units (needs --pricing).
    #[arg(long)]
    budget_cost: Option<f64>,
    /// Budget in total shots.
    #[arg(long)]
    budget_shots: Option<u64>,
    /// Override the step size α (default 1/L).
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the Lipschitz bound L (default d·Σ|c_i|).
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Shot floor for the Adam-coupled rules.
    #[arg(long)]
    s_min: Option<u64>,
    /// Per-component shots for fixed-shot SGD/Adam.
    #[arg(long)]
    fixed_shots: Option<u64>,
    /// EMA decay μ.
    #[arg(long)]
    mu: Option<f64>,
    /// Apply the clipped step size to parameter updates too.
    #[arg(long)]
    clipping: bool,
}

impl CommonArgs {
    fn budget(&self) -> Result<Budget, CliError> {
        match (self.budget_time, self.budget_cost, self.budget_shots) {
            (Some(t), None, None) => Ok(Budget::SimTime(t)),
            (None, Some(c), None) => {
                if self.pricing.is_none() {
                    return Err(CliError::Config("--budget-cost needs --pricing".into()));
                }
                Ok(Budget::EconCost(c))
            }
            (None, None, Some(s)) => Ok(Budget::Shots(s)),
            _ => Err(CliError::Config(
                "give exactly one of --budget-time, --budget-cost, --budget-shots".into(),
            )),
        }
    }

    fn plan(&self, task: TaskSpec) -> Result<RunPlan, CliError> {
        Ok(RunPlan {
            task,
            sampling: SamplingSpec::parse(&self.sampling)?,
            latency: load_profile(&self.latency)?,
            pricing: self.pricing.as_deref().map(load_profile).transpose()?,
            budget: self.budget()?,
            master_seed: self.master_seed,
            overrides: Overrides {
                alpha: self.alpha,
                lipschitz: self.lipschitz,
                s_min: self.s_min,
                fixed_shots: self.fixed_shots,
                mu: self.mu,
                clipping: self.clipping.then_some(true),
            },
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    task: TaskArgs,
    /// Optimizer name (sgd, adam, adamcans, we-adamcans, icans, gcans,
    /// wecans-i, wecans-g).
    #[arg(long)]
    optimizer: String,
    /// Seed index within the master seed's sweep.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output trace path (.ndjson; a .csv mirror is written alongside).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    task: TaskArgs,
    /// Comma-separated optimizer list.
    #[arg(long)]
    optimizers: String,
    /// Seed list: "0..29" (inclusive) or comma-separated.
    #[arg(long)]
    seeds: String,
    /// Output directory for traces and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker-thread limit (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Sweep manifest path.
    #[arg(long)]
    manifest: PathBuf,
    /// Normalized-error threshold for the to-threshold table.
    #[arg(long)]
    threshold: f64,
    /// Horizontal axis: time | cost | shots.
    #[arg(long, default_value = "time")]
    metric: String,
    /// Resample-grid resolution.
    #[arg(long, default_value_t = 200)]
    grid_points: usize,
    /// Output directory (default: the manifest's directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn load_profile(name: &str) -> Result<LatencyModel, CliError> {
    match name {
        "superconducting" => Ok(LatencyModel::superconducting()),
        "braket-rigetti" => Ok(LatencyModel::braket_rigetti()),
        "free" => Ok(LatencyModel::free()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let model: LatencyModel = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            if model.c1 < 0.0 || model.c2 < 0.0 || model.c3 < 0.0 {
                return Err(CliError::Config(format!("{path}: overheads must be nonnegative")));
            }
            Ok(model)
        }
    }
}

fn parse_optimizer(name: &str) -> Result<OptimizerKind, CliError> {
    name.parse().map_err(CliError::Config)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = |m: &str| CliError::Config(format!("bad seed list '{spec}': {m}"));
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|_| bad("range start"))?;
        let hi: u64 = b.trim().parse().map_err(|_| bad("range end"))?;
        if hi < lo {
            return Err(bad("empty range"));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad("integer expected")))
        .collect()
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run(args) => {
            let plan = args.common.plan(args.task.to_spec()?)?;
            let kind = parse_optimizer(&args.optimizer)?;
            let n = run_to_file(&plan, kind, args.seed, &args.out)?;
            eprintln!("wrote {} ({n} iterations)", args.out.display());
            Ok(())
        }
        Cmd::Sweep(args) => {
            let plan = args.common.plan(args.task.to_spec()?)?;
            let kinds = args
                .optimizers
                .split(',')
                .map(|s| parse_optimizer(s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let seeds = parse_seeds(&args.seeds)?;
            let manifest = run_sweep(&plan, &kinds, &seeds, &args.out_dir, args.workers)?;
            eprintln!(
                "wrote {} traces + {}",
                kinds.len() * seeds.len(),
                manifest.display()
            );
            Ok(())
        }
        Cmd::Summarize(args) => {
            let metric = Metric::parse(&args.metric)?;
            let summary = summarize(
                &args.manifest,
                args.threshold,
                metric,
                args.grid_points,
                args.out_dir.as_deref(),
            )?;
            print!("{}", render_table(&summary));
            Ok(())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests exit 0; argument errors are invalid
            // configuration (exit 1).
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
