//! Trace files: newline-delimited JSON with a config-echo header record
//! followed by one record per iteration, plus a CSV mirror for plotting.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shotcans::clock::LatencyModel;
use shotcans::optimize::{IterationRecord, OptimizerConfig};

use crate::error::CliError;
use crate::task::{SamplingSpec, TaskSpec};

/// First record of every trace file: the full configuration needed to
/// reproduce the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceHeader {
    pub task: TaskSpec,
    pub optimizer: OptimizerConfig,
    pub sampling: SamplingSpec,
    pub latency: LatencyModel,
    pub pricing: Option<LatencyModel>,
    pub master_seed: u64,
    pub seed_index: u64,
    pub stream_seed: u64,
    /// Exact-cost reference defining convergence zero.
    pub target_value: f64,
    /// Normalization for (cost − target) threshold tests.
    pub scale: f64,
}

/// Write the NDJSON trace and its CSV mirror (same stem, `.csv`).
pub fn emit_trace(
    path: &Path,
    header: &TraceHeader,
    records: &[IterationRecord],
) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    let mut csv = BufWriter::new(File::create(csv_path(path))?);
    csv.write_all(b"k,sim_time,econ_cost,total_shots,exact_cost\n")?;
    for rec in records {
        writeln!(
            csv,
            "{},{},{},{},{}",
            rec.k, rec.sim_time, rec.econ_cost, rec.total_shots, rec.exact_cost
        )?;
    }
    csv.flush()?;
    Ok(())
}

pub fn csv_path(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

/// Parse a trace file back into header + records.
pub fn read_trace(path: &Path) -> Result<(TraceHeader, Vec<IterationRecord>), CliError> {
    let reader = BufReader::new(
        File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
    );
    let mut lines = reader.lines();
    let head_line = lines
        .next()
        .ok_or_else(|| CliError::Io(format!("{}: empty trace file", path.display())))??;
    let header: TraceHeader = serde_json::from_str(&head_line)
        .map_err(|e| CliError::Io(format!("{}: bad header: {e}", path.display())))?;
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Io(format!("{}: bad record: {e}", path.display())))?,
        );
    }
    Ok((header, records))
}
