//! Sweep summaries: pointwise median curves over seeds and
//! time-to-threshold tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::runner::Manifest;
use crate::trace_io::read_trace;

/// Horizontal axis for curves and thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Simulated wall-clock seconds.
    Time,
    /// Accumulated economic cost.
    Cost,
    /// Total shots.
    Shots,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "time" => Ok(Metric::Time),
            "cost" => Ok(Metric::Cost),
            "shots" => Ok(Metric::Shots),
            other => Err(CliError::Config(format!(
                "unknown metric '{other}' (expected time, cost, or shots)"
            ))),
        }
    }
}

/// One trace reduced to (axis value, normalized error) steps.
pub type Steps = Vec<(f64, f64)>;

/// Lower-middle median: element (len−1)/2 of the sorted values.
pub fn lower_median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[(values.len() - 1) / 2]
}

/// Logarithmically spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Pointwise median over traces on a fixed grid, last observation carried
/// forward per trace.  Grid points before a trace's first record exclude
/// that trace; points before every trace yield `None`.
pub fn median_curve(traces: &[Steps], grid: &[f64]) -> Result<Vec<Option<f64>>, CliError> {
    if traces.is_empty() {
        return Err(CliError::Config("median curve needs at least one trace".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("grid must be strictly increasing".into()));
    }
    let mut cursors = vec![0usize; traces.len()];
    let mut out = Vec::with_capacity(grid.len());
    for &g in grid {
        let mut values = Vec::new();
        for (trace, cursor) in traces.iter().zip(&mut cursors) {
            while *cursor < trace.len() && trace[*cursor].0 <= g {
                *cursor += 1;
            }
            if *cursor > 0 {
                values.push(trace[*cursor - 1].1);
            }
        }
        out.push((!values.is_empty()).then(|| lower_median(values)));
    }
    Ok(out)
}

/// First grid point where the median curve is at or below the threshold.
pub fn time_to_threshold(grid: &[f64], curve: &[Option<f64>], threshold: f64) -> Option<f64> {
    grid.iter()
        .zip(curve)
        .find(|(_, v)| matches!(v, Some(x) if *x <= threshold))
        .map(|(&g, _)| g)
}

/// Per-optimizer summary entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub optimizer: String,
    pub n_traces: usize,
    /// Axis value at which the median normalized error first reaches the
    /// threshold; `None` when it never does within the data.
    pub to_threshold: Option<f64>,
    /// Final median normalized error.
    pub final_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub metric: Metric,
    pub threshold: f64,
    pub grid_points: usize,
    pub entries: Vec<SummaryEntry>,
}

fn axis_value(rec: &shotcans::optimize::IterationRecord, metric: Metric) -> f64 {
    match metric {
        Metric::Time => rec.sim_time,
        Metric::Cost => rec.econ_cost,
        Metric::Shots => rec.total_shots as f64,
    }
}

/// Load one optimizer's traces from a manifest as normalized step
/// functions.
pub fn load_steps(
    manifest: &Manifest,
    manifest_dir: &Path,
    optimizer: &str,
    metric: Metric,
) -> Result<Vec<Steps>, CliError> {
    let mut out = Vec::new();
    for entry in manifest.traces.iter().filter(|t| t.optimizer == optimizer) {
        let (header, records) = read_trace(&manifest_dir.join(&entry.file))?;
        let steps = records
            .iter()
            .map(|r| {
                (
                    axis_value(r, metric),
                    (r.exact_cost - header.target_value) / header.scale,
                )
            })
            .collect();
        out.push(steps);
    }
    Ok(out)
}

/// Summarize a manifest: median curves (one CSV per optimizer) and a
/// time-to-threshold table, written under `out_dir`.
pub fn summarize(
    manifest_path: &Path,
    threshold: f64,
    metric: Metric,
    grid_points: usize,
    out_dir: Option<&Path>,
) -> Result<Summary, CliError> {
    if grid_points < 2 {
        return Err(CliError::Config("grid needs at least 2 points".into()));
    }
    let manifest = crate::runner::read_manifest(manifest_path)?;
    let manifest_dir: PathBuf = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = out_dir.unwrap_or(&manifest_dir);
    std::fs::create_dir_all(out_dir)?;

    // Shared grid across optimizers so curves are comparable.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut all_steps = Vec::new();
    for opt in &manifest.optimizers {
        let steps = load_steps(&manifest, &manifest_dir, opt, metric)?;
        for s in &steps {
            if let Some(&(x, _)) = s.first() {
                lo = lo.min(x);
            }
            if let Some(&(x, _)) = s.last() {
                hi = hi.max(x);
            }
        }
        all_steps.push((opt.clone(), steps));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Config("manifest has no non-empty traces".into()));
    }
    let lo = lo.max(1e-12);
    let hi = if hi > lo { hi } else { lo * 2.0 };
    let grid = log_grid(lo, hi, grid_points);

    let mut entries = Vec::new();
    for (opt, steps) in &all_steps {
        if steps.is_empty() {
            continue;
        }
        let curve = median_curve(steps, &grid)?;
        let mut csv = std::io::BufWriter::new(std::fs::File::create(
            out_dir.join(format!("median-{opt}.csv")),
        )?);
        csv.write_all(b"x,median_error\n")?;
        for (g, v) in grid.iter().zip(&curve) {
            if let Some(v) = v {
                writeln!(csv, "{g},{v}")?;
            }
        }
        csv.flush()?;
        entries.push(SummaryEntry {
            optimizer: opt.clone(),
            n_traces: steps.len(),
            to_threshold: time_to_threshold(&grid, &curve, threshold),
            final_error: curve.iter().rev().find_map(|v| *v),
        });
    }
    let summary = Summary {
        metric,
        threshold,
        grid_points,
        entries,
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(summary)
}

/// Render the table printed by the summarize subcommand.
pub fn render_table(summary: &Summary) -> String {
    let mut s = format!(
        "{:<14} {:>8} {:>16} {:>14}\n",
        "optimizer", "traces", "to_threshold", "final_error"
    );
    for e in &summary.entries {
        let tt = e
            .to_threshold
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let fe = e
            .final_error
            .map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
        s.push_str(&format!(
            "{:<14} {:>8} {:>16} {:>14}\n",
            e.optimizer, e.n_traces, tt, fe
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trace_is_its_own_step_function() {
        let trace: Steps = vec![(1.0, 5.0), (2.0, 3.0), (4.0, 1.0)];
        let grid = [0.5, 1.0, 1.5, 2.5, 5.0];
        let curve = median_curve(&[trace], &grid).unwrap();
        assert_eq!(curve, vec![None, Some(5.0), Some(5.0), Some(3.0), Some(1.0)]);
    }

    #[test]
    fn constant_traces_median() {
        let traces: Vec<Steps> = [1.0, 2.0, 9.0]
            .iter()
            .map(|&v| vec![(0.5, v), (10.0, v)])
            .collect();
        let grid = [1.0, 2.0, 20.0];
        let curve = median_curve(&traces, &grid).unwrap();
        assert_eq!(curve, vec![Some(2.0), Some(2.0), Some(2.0)]);
    }

    #[test]
    fn staggered_starts_use_started_traces_only() {
        let traces: Vec<Steps> = vec![vec![(1.0, 10.0)], vec![(5.0, 0.0)]];
        let grid = [2.0, 6.0];
        let curve = median_curve(&traces, &grid).unwrap();
        assert_eq!(curve[0], Some(10.0));
        // two values at x=6: lower-middle of {0, 10} is 0
        assert_eq!(curve[1], Some(0.0));
    }

    #[test]
    fn lower_median_even_count() {
        assert_eq!(lower_median(vec![4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(lower_median(vec![7.0]), 7.0);
    }

    #[test]
    fn threshold_lookup() {
        let grid = [1.0, 2.0, 3.0];
        let curve = [None, Some(0.5), Some(0.05)];
        assert_eq!(time_to_threshold(&grid, &curve, 0.1), Some(3.0));
        assert_eq!(time_to_threshold(&grid, &curve, 1.0), Some(2.0));
        assert_eq!(time_to_threshold(&grid, &curve, 0.01), None);
    }

    #[test]
    fn log_grid_endpoints_and_monotonicity() {
        let g = log_grid(0.1, 1000.0, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 0.1).abs() < 1e-12);
        assert!((g[199] - 1000.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_trace_set_is_an_error() {
        assert!(median_curve(&[], &[1.0]).is_err());
    }
}
