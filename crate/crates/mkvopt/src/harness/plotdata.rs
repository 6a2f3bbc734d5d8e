//! Convergence-curve data: per-iteration mean and standard deviation of the
//! best-so-far value across the runs of each requested method.

use super::grid::{parse_trace, Manifest};
use crate::error::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Emit CSV columns `iteration, <method>_mean, <method>_std, ...` for one
/// benchmark. All traces must share the same recorded iteration grid.
/// Standard deviations use the population convention.
pub fn plot_data(
    dir: &Path,
    benchmark: &str,
    methods: &[String],
    out: &mut impl Write,
) -> Result<()> {
    let manifest = Manifest::from_dir(dir)?;

    let mut grid: Option<Vec<usize>> = None;
    let mut per_method: Vec<Vec<Vec<f64>>> = Vec::new(); // [method][run][iter]
    for method in methods {
        let cell = manifest
            .cells
            .iter()
            .find(|c| &c.method == method && c.benchmark == benchmark)
            .ok_or_else(|| {
                Error::MissingTraces(vec![format!("{method} on {benchmark} (no such cell)")])
            })?;
        let mut runs = Vec::new();
        for record in &cell.runs {
            let Some(rel) = &record.trace else {
                continue; // diverged runs carry no trace
            };
            let path = dir.join(rel);
            let text = fs::read_to_string(&path).map_err(|_| {
                Error::MissingTraces(vec![rel.clone()])
            })?;
            let (iters, vals) = parse_trace(&text, rel)?;
            match &grid {
                None => grid = Some(iters),
                Some(g) if *g == iters => {}
                Some(_) => {
                    return Err(Error::MismatchedGrid(format!(
                        "{rel} records different iterations than earlier traces"
                    )))
                }
            }
            runs.push(vals);
        }
        per_method.push(runs);
    }

    write!(out, "iteration")?;
    for m in methods {
        write!(out, ",{m}_mean,{m}_std")?;
    }
    writeln!(out)?;

    let Some(grid) = grid else {
        return Ok(()); // nothing recorded: header-only output
    };

    for (row, &iter) in grid.iter().enumerate() {
        write!(out, "{iter}")?;
        for runs in &per_method {
            let n = runs.len() as f64;
            let mean = runs.iter().map(|r| r[row]).sum::<f64>() / n;
            let var = runs.iter().map(|r| (r[row] - mean).powi(2)).sum::<f64>() / n;
            write!(out, ",{:.16e},{:.16e}", mean, var.sqrt())?;
        }
        writeln!(out)?;
    }
    Ok(())
}
