//! Run execution: one (task, optimizer, seed) cell, and manifest-driven
//! sweeps fanned out over a worker pool.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shotcans::clock::LatencyModel;
use shotcans::optimize::{self, Budget, IterationRecord, OptimizerConfig, OptimizerKind};

use crate::error::CliError;
use crate::seeds;
use crate::task::{build_task, BuiltTask, SamplingSpec, TaskSpec};
use crate::trace_io::{emit_trace, TraceHeader};

/// Optional hyperparameter overrides applied on top of the per-optimizer
/// defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_min: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clipping: Option<bool>,
}

impl Overrides {
    fn apply(&self, config: &mut OptimizerConfig) {
        if self.alpha.is_some() {
            config.alpha = self.alpha;
        }
        if self.lipschitz.is_some() {
            config.lipschitz = self.lipschitz;
        }
        if let Some(s) = self.s_min {
            config.s_min = s;
        }
        if let Some(s) = self.fixed_shots {
            config.fixed_shots = s;
        }
        if let Some(m) = self.mu {
            config.mu = m;
        }
        if let Some(c) = self.clipping {
            config.clipping = c;
        }
    }
}

/// Everything shared by the cells of a sweep (and by a single run).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunPlan {
    pub task: TaskSpec,
    pub sampling: SamplingSpec,
    pub latency: LatencyModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pricing: Option<LatencyModel>,
    pub budget: Budget,
    pub master_seed: u64,
    #[serde(default)]
    pub overrides: Overrides,
}

/// Sweep output manifest: the plan plus one trace-file entry per cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub plan: RunPlan,
    pub optimizers: Vec<String>,
    pub seeds: Vec<u64>,
    pub traces: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub optimizer: String,
    pub seed: u64,
    pub file: String,
}

/// Execute one cell and return its header and records.
pub fn run_cell(
    plan: &RunPlan,
    built: &BuiltTask,
    kind: OptimizerKind,
    seed_index: u64,
) -> Result<(TraceHeader, Vec<IterationRecord>), CliError> {
    let mut config = OptimizerConfig::new(kind, plan.budget);
    plan.overrides.apply(&mut config);
    let mode = plan.sampling.to_mode(&built.observable)?;
    let stream_seed = seeds::stream_seed(plan.master_seed, kind.name(), seed_index);
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let trace = optimize::run_optimizer(
        &built.circuit,
        &built.observable,
        &mode,
        &config,
        &plan.latency,
        plan.pricing.as_ref(),
        None,
        &mut rng,
    )
    .map_err(|e| match e {
        optimize::OptimizeError::InvalidConfig(m) => CliError::Config(m),
        other => CliError::Task(other.to_string()),
    })?;
    let header = TraceHeader {
        task: plan.task.clone(),
        optimizer: config,
        sampling: plan.sampling,
        latency: plan.latency.clone(),
        pricing: plan.pricing.clone(),
        master_seed: plan.master_seed,
        seed_index,
        stream_seed,
        target_value: built.target_value,
        scale: built.scale,
    };
    Ok((header, trace.records))
}

/// Execute one cell and write its trace file.
pub fn run_to_file(
    plan: &RunPlan,
    kind: OptimizerKind,
    seed_index: u64,
    out: &Path,
) -> Result<usize, CliError> {
    let built = build_task(&plan.task)?;
    let (header, records) = run_cell(plan, &built, kind, seed_index)?;
    emit_trace(out, &header, &records)?;
    Ok(records.len())
}

pub fn trace_file_name(optimizer: &str, seed: u64) -> String {
    format!("{optimizer}-seed{seed:03}.ndjson")
}

/// Fan a sweep out over the worker pool, write one trace per cell plus the
/// manifest, and return the manifest path.
pub fn run_sweep(
    plan: &RunPlan,
    optimizers: &[OptimizerKind],
    seed_list: &[u64],
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<PathBuf, CliError> {
    if optimizers.is_empty() || seed_list.is_empty() {
        return Err(CliError::Config("sweep needs at least one optimizer and one seed".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let built = build_task(&plan.task)?;
    let cells: Vec<(OptimizerKind, u64)> = optimizers
        .iter()
        .flat_map(|&k| seed_list.iter().map(move |&s| (k, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Result<TraceEntry, CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(kind, seed)| {
                let (header, records) = run_cell(plan, &built, kind, seed)?;
                let file = trace_file_name(kind.name(), seed);
                emit_trace(&out_dir.join(&file), &header, &records)?;
                Ok(TraceEntry {
                    optimizer: kind.name().to_string(),
                    seed,
                    file,
                })
            })
            .collect()
    });
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        traces.push(r?);
    }
    let manifest = Manifest {
        plan: plan.clone(),
        optimizers: optimizers.iter().map(|k| k.name().to_string()).collect(),
        seeds: seed_list.to_vec(),
        traces,
    };
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
