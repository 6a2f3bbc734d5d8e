//! Report generation: per-family comparison tables with mean best values,
//! average ranks, competitive ratios and significance flags, recomputed from
//! the trace files rather than the manifest so an independent reader of the
//! same CSVs gets identical numbers.

use super::config::ExperimentConfig;
use super::grid::{parse_trace, Manifest};
use crate::error::{Error, Result};
use crate::objectives::make_objective_with;
use crate::stats::{
    average_rank, ecr, significance_protocol, BenchmarkResult, MethodResults,
    SignificanceAnnotation,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// All run results of one experiment directory, final bests recomputed from
/// the trace CSVs.
#[derive(Debug)]
pub struct LoadedResults {
    pub manifest: Manifest,
    /// `finals[method_id][bench_key]` = per-run final best (diverged runs
    /// excluded).
    pub finals: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    /// `diverged[method_id]` = diverged run count.
    pub diverged: BTreeMap<String, usize>,
}

pub fn load_results(dir: &Path) -> Result<LoadedResults> {
    let manifest = Manifest::from_dir(dir)?;
    let mut finals: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    let mut diverged: BTreeMap<String, usize> = BTreeMap::new();
    let mut missing = Vec::new();
    for cell in &manifest.cells {
        let per_bench = finals.entry(cell.method.clone()).or_default();
        let bucket = per_bench.entry(cell.benchmark.clone()).or_default();
        for run in &cell.runs {
            match &run.trace {
                Some(rel) => {
                    let path = dir.join(rel);
                    match fs::read_to_string(&path) {
                        Ok(text) => {
                            let (_, vals) = parse_trace(&text, rel)?;
                            match vals.last() {
                                Some(&v) => bucket.push(v),
                                None => missing.push(format!("{rel} (empty)")),
                            }
                        }
                        Err(_) => missing.push(rel.clone()),
                    }
                }
                None => {
                    *diverged.entry(cell.method.clone()).or_default() += 1;
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingTraces(missing));
    }
    Ok(LoadedResults {
        manifest,
        finals,
        diverged,
    })
}

/// One per-family comparison table.
#[derive(Debug, Serialize)]
pub struct FamilyTable {
    pub family: String,
    pub method_ids: Vec<String>,
    pub benchmarks: Vec<String>,
    /// `means[bench][method]`.
    pub means: Vec<Vec<f64>>,
    /// `runs_used[bench][method]`: non-diverged runs behind each mean.
    pub runs_used: Vec<Vec<usize>>,
    pub avg_rank: Option<Vec<f64>>,
    pub ecr: Vec<f64>,
    pub annotations: Vec<SignificanceAnnotation>,
    pub diverged: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub tables: Vec<FamilyTable>,
}

pub fn build_report(loaded: &LoadedResults) -> Result<Report> {
    let cfg: &ExperimentConfig = &loaded.manifest.experiment;

    // group methods by dynamics family, preserving config order
    let mut family_order: Vec<String> = Vec::new();
    let mut family_members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (idx, m) in cfg.methods.iter().enumerate() {
        let fam = m.dynamics.family_name().to_string();
        if !family_members.contains_key(&fam) {
            family_order.push(fam.clone());
        }
        family_members.entry(fam).or_default().push(idx);
    }

    let mut tables = Vec::new();
    for fam in family_order {
        let members = &family_members[&fam];
        let mut method_results = Vec::new();
        for &idx in members {
            let m = &cfg.methods[idx];
            let mut results = Vec::new();
            for b in &cfg.benchmarks {
                let obj = make_objective_with(&b.name, b.dim, cfg.flags.normalize_by_dim)?;
                let finals = loaded
                    .finals
                    .get(&m.id)
                    .and_then(|per| per.get(&b.key()))
                    .cloned()
                    .unwrap_or_default();
                if finals.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "no usable runs for method {} on {}",
                        m.id,
                        b.key()
                    )));
                }
                results.push(BenchmarkResult {
                    benchmark: b.key(),
                    known_min: obj.known_min_value,
                    finals,
                });
            }
            method_results.push(MethodResults {
                method: m.id.clone(),
                results,
            });
        }

        let means: Vec<Vec<f64>> = (0..cfg.benchmarks.len())
            .map(|b| method_results.iter().map(|m| m.results[b].mean_final()).collect())
            .collect();
        let runs_used: Vec<Vec<usize>> = (0..cfg.benchmarks.len())
            .map(|b| method_results.iter().map(|m| m.results[b].finals.len()).collect())
            .collect();
        let avg = if method_results.len() >= 2 {
            Some(average_rank(&method_results)?)
        } else {
            None
        };
        let ratios = ecr(&method_results)?;

        // the protocol needs exactly one vanilla method in the family
        let vanilla_indices: Vec<usize> = members
            .iter()
            .enumerate()
            .filter(|(_, &idx)| cfg.methods[idx].noise.is_vanilla())
            .map(|(local, _)| local)
            .collect();
        let annotations = match vanilla_indices.as_slice() {
            [v] => significance_protocol(&method_results, *v, cfg.flags.sidedness, 0.05)?,
            _ => {
                // no unambiguous vanilla: record bests without tests
                (0..cfg.benchmarks.len())
                    .map(|b| {
                        let best = means[b]
                            .iter()
                            .enumerate()
                            .min_by(|x, y| x.1.partial_cmp(y.1).expect("finite"))
                            .map(|(i, _)| i)
                            .unwrap_or(0);
                        SignificanceAnnotation {
                            benchmark: cfg.benchmarks[b].key(),
                            best_index: best,
                            max_p: None,
                            significant: false,
                        }
                    })
                    .collect()
            }
        };

        tables.push(FamilyTable {
            family: fam,
            method_ids: members.iter().map(|&i| cfg.methods[i].id.clone()).collect(),
            benchmarks: cfg.benchmarks.iter().map(|b| b.key()).collect(),
            means,
            runs_used,
            avg_rank: avg,
            ecr: ratios,
            annotations,
            diverged: members
                .iter()
                .map(|&i| loaded.diverged.get(&cfg.methods[i].id).copied().unwrap_or(0))
                .collect(),
        });
    }

    Ok(Report {
        experiment: cfg.experiment.name.clone(),
        tables,
    })
}

pub fn print_report(report: &Report, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for table in &report.tables {
        writeln!(out, "== {} dynamics ==", table.family)?;
        write!(out, "{:<24}", "benchmark")?;
        for id in &table.method_ids {
            write!(out, "{id:>22}")?;
        }
        writeln!(out, "{:>10}{:>6}", "max-p", "sig")?;
        for (b, bench) in table.benchmarks.iter().enumerate() {
            write!(out, "{bench:<24}")?;
            let ann = &table.annotations[b];
            for (m, mean) in table.means[b].iter().enumerate() {
                let marker = if m == ann.best_index { "*" } else { "" };
                write!(out, "{:>22}", format!("{mean:.6}{marker}"))?;
            }
            match ann.max_p {
                Some(p) => write!(out, "{:>10}", format!("{p:.3}"))?,
                None => write!(out, "{:>10}", "-")?,
            }
            writeln!(out, "{:>6}", if ann.significant { "yes" } else { "no" })?;
        }
        if let Some(ranks) = &table.avg_rank {
            write!(out, "{:<24}", "avg-rank")?;
            for r in ranks {
                write!(out, "{:>22}", format!("{r:.2}"))?;
            }
            writeln!(out)?;
        }
        write!(out, "{:<24}", "ecr")?;
        for e in &table.ecr {
            write!(out, "{:>22}", format!("{e:.4}"))?;
        }
        writeln!(out)?;
        if table.diverged.iter().any(|&d| d > 0) {
            write!(out, "{:<24}", "diverged-excluded")?;
            for d in &table.diverged {
                write!(out, "{d:>22}")?;
            }
            writeln!(out)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Write `report.csv` (per-cell means), `summary.csv` (rank/ECR) and
/// `significance.csv` next to the traces.
pub fn write_report_csv(report: &Report, dir: &Path) -> Result<()> {
    let mut cells = String::from("family,method,benchmark,mean_final_best,runs_used\n");
    let mut summary = String::from("family,method,avg_rank,ecr,diverged_runs\n");
    let mut sig = String::from("family,benchmark,best_method,max_p,significant\n");
    for t in &report.tables {
        for (b, bench) in t.benchmarks.iter().enumerate() {
            for (m, id) in t.method_ids.iter().enumerate() {
                cells.push_str(&format!(
                    "{},{},{},{:.16e},{}\n",
                    t.family, id, bench, t.means[b][m], t.runs_used[b][m],
                ));
            }
            let ann = &t.annotations[b];
            sig.push_str(&format!(
                "{},{},{},{},{}\n",
                t.family,
                bench,
                t.method_ids[ann.best_index],
                ann.max_p.map_or(String::from(""), |p| format!("{p:.16e}")),
                ann.significant
            ));
        }
        for (m, id) in t.method_ids.iter().enumerate() {
            summary.push_str(&format!(
                "{},{},{},{:.16e},{}\n",
                t.family,
                id,
                t.avg_rank
                    .as_ref()
                    .map_or(String::from(""), |r| format!("{:.16e}", r[m])),
                t.ecr[m],
                t.diverged[m],
            ));
        }
    }
    fs::write(dir.join("report.csv"), cells)?;
    fs::write(dir.join("summary.csv"), summary)?;
    fs::write(dir.join("significance.csv"), sig)?;
    Ok(())
}
