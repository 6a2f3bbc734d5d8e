//! Seeded grid execution and trace persistence.
//!
//! One trace CSV per (method, benchmark, run) under
//! `<out>/traces/<method>/<benchmark>/run_<r>.csv`, plus `manifest.json`
//! capturing the resolved configuration, package version, seeds, divergence
//! records and timings. Trace files hold only deterministic content
//! (iteration index and best value at 17 significant digits), so reruns are
//! byte-identical regardless of the job count; wall times live in the
//! manifest.

use super::config::{BenchmarkEntry, ExperimentConfig, MethodEntry};
use crate::error::{Error, Result};
use crate::integrator::{run, RunTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TRACE_HEADER: &str = "iteration,best_value";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: ExperimentConfig,
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub method: String,
    pub benchmark: String,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// Trace path relative to the output directory; `None` for failed runs.
    pub trace: Option<String>,
    pub diverged_at: Option<usize>,
    /// Failure description for runs without a trace (divergence or a moment
    /// singularity under the abort policy).
    pub error: Option<String>,
    pub final_best: Option<f64>,
    pub moment_clamp_events: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct GridSummary {
    pub total_runs: usize,
    pub diverged_runs: usize,
    /// Some (method, benchmark) cell exceeded `max_diverged_fraction`.
    pub divergence_threshold_exceeded: bool,
    pub manifest_path: PathBuf,
}

pub fn trace_relpath(method: &str, bench_key: &str, run: usize) -> String {
    format!("traces/{method}/{bench_key}/run_{run}.csv")
}

/// Serialize a trace to the fixed CSV layout: `.` decimal separator, `,`
/// delimiter, LF endings, 17-significant-digit floats.
pub fn format_trace(trace: &RunTrace) -> String {
    let mut s = String::with_capacity(32 * trace.iterations.len() + 32);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for (it, val) in trace.iterations.iter().zip(&trace.best_values) {
        s.push_str(&format!("{it},{val:.16e}\n"));
    }
    s
}

/// Parse a trace CSV back into (iterations, best values).
pub fn parse_trace(text: &str, path: &str) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => {
            return Err(Error::Parse {
                path: path.into(),
                message: format!("bad trace header: {other:?}"),
            })
        }
    }
    let mut iters = Vec::new();
    let mut vals = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse {
            path: path.into(),
            message: format!("line {}: expected two fields", lineno + 2),
        })?;
        let it: usize = a.parse().map_err(|e| Error::Parse {
            path: path.into(),
            message: format!("line {}: {e}", lineno + 2),
        })?;
        let v: f64 = b.parse().map_err(|e| Error::Parse {
            path: path.into(),
            message: format!("line {}: {e}", lineno + 2),
        })?;
        iters.push(it);
        vals.push(v);
    }
    Ok((iters, vals))
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct TaskResult {
    record: RunRecord,
    trace_body: Option<String>,
}

/// Execute the full (method x benchmark x run) grid, writing traces and the
/// manifest under `out_dir`. `jobs = 0` uses all available cores. Grid order
/// and file contents are independent of `jobs`.
pub fn run_grid(cfg: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<GridSummary> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;

    struct Task<'a> {
        method: &'a MethodEntry,
        bench: &'a BenchmarkEntry,
        run_idx: usize,
    }
    let mut tasks = Vec::new();
    for method in &cfg.methods {
        for bench in &cfg.benchmarks {
            for run_idx in 0..cfg.experiment.n_runs {
                tasks.push(Task {
                    method,
                    bench,
                    run_idx,
                });
            }
        }
    }

    let execute = |t: &Task| -> Result<TaskResult> {
        let rc = cfg.run_config(t.method, t.bench, t.run_idx)?;
        let seed = rc.seed;
        let failed = |diverged_at: Option<usize>, error: String| TaskResult {
            record: RunRecord {
                run: t.run_idx,
                seed,
                trace: None,
                diverged_at,
                error: Some(error),
                final_best: None,
                moment_clamp_events: 0,
                wall_time: 0.0,
            },
            trace_body: None,
        };
        match run(&rc) {
            Ok(trace) => Ok(TaskResult {
                record: RunRecord {
                    run: t.run_idx,
                    seed,
                    trace: Some(trace_relpath(&t.method.id, &t.bench.key(), t.run_idx)),
                    diverged_at: None,
                    error: None,
                    final_best: Some(trace.final_best),
                    moment_clamp_events: trace.moment_clamp_events,
                    wall_time: trace.wall_time,
                },
                trace_body: Some(format_trace(&trace)),
            }),
            Err(e @ Error::Diverged { iteration }) => {
                Ok(failed(Some(iteration), e.to_string()))
            }
            Err(e @ Error::SingularMoment { .. }) => Ok(failed(None, e.to_string())),
            Err(e) => Err(e),
        }
    };

    let results: Vec<Result<TaskResult>> = if jobs == 1 {
        tasks.iter().map(execute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs) // 0 = default
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(execute).collect())
    };

    // write traces and assemble the manifest in deterministic grid order
    let mut cells: Vec<CellRecord> = Vec::new();
    let mut total = 0usize;
    let mut diverged = 0usize;
    let mut threshold_exceeded = false;
    let mut it = results.into_iter();
    for method in &cfg.methods {
        for bench in &cfg.benchmarks {
            let mut runs = Vec::with_capacity(cfg.experiment.n_runs);
            let mut cell_diverged = 0usize;
            for _ in 0..cfg.experiment.n_runs {
                let tr = it.next().expect("task count matches grid")?;
                total += 1;
                if tr.record.error.is_some() {
                    diverged += 1;
                    cell_diverged += 1;
                }
                if let (Some(rel), Some(body)) = (&tr.record.trace, &tr.trace_body) {
                    write_atomic(&out_dir.join(rel), body)?;
                }
                runs.push(tr.record);
            }
            let frac = cell_diverged as f64 / cfg.experiment.n_runs as f64;
            if frac > cfg.flags.max_diverged_fraction {
                threshold_exceeded = true;
            }
            cells.push(CellRecord {
                method: method.id.clone(),
                benchmark: bench.key(),
                runs,
            });
        }
    }

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.clone(),
        cells,
    };
    let manifest_path = out_dir.join("manifest.json");
    write_atomic(
        &manifest_path,
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;

    Ok(GridSummary {
        total_runs: total,
        diverged_runs: diverged,
        divergence_threshold_exceeded: threshold_exceeded,
        manifest_path,
    })
}

impl Manifest {
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
