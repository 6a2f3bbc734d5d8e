//! Harness integration: grid execution, manifest bookkeeping, report
//! round-trips against an independent trace reader, plot data, and the
//! determinism contract with noise plug-ins enabled.

use mkvopt::harness::{
    build_report, load_results, plot_data, run_grid, ExperimentConfig, Manifest,
};
use std::path::Path;

const MINI_GRID: &str = r#"
[experiment]
name = "mini"
n_particles = 20
n_iters = 40
dt = 0.1
n_runs = 4
base_seed = 77

[[benchmarks]]
name = "rastrigin"
dim = 3

[[benchmarks]]
name = "square"
dim = 3

[[methods]]
id = "langevin"
dynamics = { family = "langevin", kappa = 1.0 }
noise = { kind = "none" }

[[methods]]
id = "smd-langevin-meanvar"
dynamics = { family = "langevin", kappa = 1.0 }
noise = { kind = "smd", observable = "mean-plus-variance" }

[[methods]]
id = "gcn-langevin"
dynamics = { family = "langevin", kappa = 1.0 }
noise = { kind = "gcn", bandwidth = 1.0 }
"#;

fn mini_config() -> ExperimentConfig {
    let cfg: ExperimentConfig = toml::from_str(MINI_GRID).unwrap();
    cfg.validate().unwrap();
    cfg
}

#[test]
fn grid_writes_traces_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config();
    let summary = run_grid(&cfg, tmp.path(), 0).unwrap();
    assert_eq!(summary.total_runs, 3 * 2 * 4);
    assert_eq!(summary.diverged_runs, 0);
    assert!(!summary.divergence_threshold_exceeded);

    let manifest = Manifest::from_dir(tmp.path()).unwrap();
    assert_eq!(manifest.cells.len(), 3 * 2);
    for cell in &manifest.cells {
        for (r, rec) in cell.runs.iter().enumerate() {
            assert_eq!(rec.run, r);
            // paired seeding: run r of every method shares base_seed + r
            assert_eq!(rec.seed, 77 + r as u64);
            let rel = rec.trace.as_ref().unwrap();
            assert!(tmp.path().join(rel).is_file(), "missing {rel}");
        }
    }
}

/// Minimal independent CSV reader: no shared code with the library parser.
fn independent_final_best(path: &Path) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    let last = text.lines().last().unwrap();
    last.split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn report_matches_independent_reader() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let loaded = load_results(tmp.path()).unwrap();
    let report = build_report(&loaded).unwrap();

    // recompute each mean from the raw files with the independent reader
    let table = &report.tables[0];
    for (b, bench) in table.benchmarks.iter().enumerate() {
        for (m, id) in table.method_ids.iter().enumerate() {
            let mut finals = Vec::new();
            for r in 0..cfg.experiment.n_runs {
                let rel = format!("traces/{id}/{bench}/run_{r}.csv");
                finals.push(independent_final_best(&tmp.path().join(rel)));
            }
            let mean = finals.iter().sum::<f64>() / finals.len() as f64;
            assert_eq!(
                mean.to_bits(),
                table.means[b][m].to_bits(),
                "mean mismatch for {id} on {bench}"
            );
        }
    }

    // one family, three methods: ranks and ECR are populated
    assert_eq!(report.tables.len(), 1);
    assert_eq!(table.method_ids.len(), 3);
    assert!(table.avg_rank.is_some());
    assert_eq!(table.ecr.len(), 3);
    for ann in &table.annotations {
        assert!(ann.max_p.is_some(), "vanilla present, tests must run");
    }
}

#[test]
fn rerun_is_byte_identical_with_noise_plugins() {
    let cfg = mini_config();
    let run_once = |jobs: usize| -> Vec<(String, Vec<u8>)> {
        let tmp = tempfile::tempdir().unwrap();
        run_grid(&cfg, tmp.path(), jobs).unwrap();
        let mut files = Vec::new();
        for m in &cfg.methods {
            for b in &cfg.benchmarks {
                for r in 0..cfg.experiment.n_runs {
                    let rel = format!("traces/{}/{}/run_{r}.csv", m.id, b.key());
                    files.push((rel.clone(), std::fs::read(tmp.path().join(&rel)).unwrap()));
                }
            }
        }
        files
    };
    let a = run_once(1);
    let b = run_once(2);
    assert_eq!(a, b, "traces differ across job counts");
}

#[test]
fn plot_data_emits_monotone_means() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let mut out = Vec::new();
    plot_data(
        tmp.path(),
        "rastrigin-d3",
        &["langevin".into(), "smd-langevin-meanvar".into()],
        &mut out,
    )
    .unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,langevin_mean,langevin_std,smd-langevin-meanvar_mean,smd-langevin-meanvar_std"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41); // iterations 0..=40
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1], "mean best-so-far must be non-increasing");
        assert!(w[1][3] <= w[0][3]);
    }
    // LF endings and '.' decimals by construction
    assert!(!text.contains('\r'));
}

#[test]
fn plot_data_no_methods_is_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let mut out = Vec::new();
    plot_data(tmp.path(), "rastrigin-d3", &[], &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "iteration\n");
}

#[test]
fn plot_data_unknown_method_is_missing_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let mut out = Vec::new();
    let err = plot_data(tmp.path(), "rastrigin-d3", &["nope".into()], &mut out).unwrap_err();
    assert!(matches!(err, mkvopt::Error::MissingTraces(_)));
}

#[test]
fn minimal_grid_one_trace_plus_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        [experiment]
        name = "one"
        n_particles = 5
        n_iters = 3
        dt = 0.1
        n_runs = 1
        base_seed = 1

        [[benchmarks]]
        name = "square"
        dim = 2

        [[methods]]
        id = "msgd"
        dynamics = { family = "msgd" }
        "#,
    )
    .unwrap();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let mut files: Vec<_> = walk_files(tmp.path());
    files.sort();
    assert_eq!(
        files,
        vec![
            "manifest.json".to_string(),
            "traces/msgd/square-d2/run_0.csv".to_string()
        ]
    );
}

fn walk_files(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(
                    path.strip_prefix(root)
                        .unwrap()
                        .to_string_lossy()
                        .into_owned(),
                );
            }
        }
    }
    out
}

#[test]
fn single_method_report_has_no_significance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        [experiment]
        name = "solo"
        n_particles = 8
        n_iters = 10
        dt = 0.1
        n_runs = 3
        base_seed = 4

        [[benchmarks]]
        name = "square"
        dim = 2

        [[methods]]
        id = "langevin"
        dynamics = { family = "langevin" }
        "#,
    )
    .unwrap();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let report = build_report(&load_results(tmp.path()).unwrap()).unwrap();
    let table = &report.tables[0];
    assert!(table.avg_rank.is_none());
    assert_eq!(table.ecr, vec![1.0]);
    for ann in &table.annotations {
        assert!(ann.max_p.is_none());
        assert!(!ann.significant);
    }
}

#[test]
fn duplicate_settings_tie_with_p_one() {
    // two method ids with identical dynamics/noise share seeds, so their
    // traces are identical: equal means, tied ranks, p = 1
    let tmp = tempfile::tempdir().unwrap();
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        [experiment]
        name = "twins"
        n_particles = 10
        n_iters = 15
        dt = 0.1
        n_runs = 4
        base_seed = 3

        [[benchmarks]]
        name = "rastrigin"
        dim = 2

        [[methods]]
        id = "cbo"
        dynamics = { family = "cbo" }

        [[methods]]
        id = "cbo-again"
        dynamics = { family = "cbo" }
        noise = { kind = "smd", observable = "mean", beta = 0.0 }
        "#,
    )
    .unwrap();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let report = build_report(&load_results(tmp.path()).unwrap()).unwrap();
    let table = &report.tables[0];
    assert_eq!(table.means[0][0].to_bits(), table.means[0][1].to_bits());
    assert_eq!(table.avg_rank.as_ref().unwrap(), &vec![1.5, 1.5]);
    assert_eq!(table.annotations[0].max_p, Some(1.0));
    assert!(!table.annotations[0].significant);
}

#[test]
fn mean_shift_helps_cbo_on_small_ackley() {
    // the setting of the headline convergence figure: ackley d=4, 30
    // particles; the mean-forced variant ends at or below vanilla
    let tmp = tempfile::tempdir().unwrap();
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        [experiment]
        name = "fig"
        n_particles = 30
        n_iters = 300
        dt = 0.1
        n_runs = 5
        base_seed = 0

        [[benchmarks]]
        name = "ackley"
        dim = 4

        [[methods]]
        id = "cbo"
        dynamics = { family = "cbo" }

        [[methods]]
        id = "smd-cbo-mean"
        dynamics = { family = "cbo" }
        noise = { kind = "smd", observable = "mean" }
        "#,
    )
    .unwrap();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let mut csv = Vec::new();
    plot_data(
        tmp.path(),
        "ackley-d4",
        &["cbo".into(), "smd-cbo-mean".into()],
        &mut csv,
    )
    .unwrap();
    let text = String::from_utf8(csv).unwrap();
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let (vanilla_mean, smd_mean) = (last[1], last[3]);
    assert!(
        smd_mean <= vanilla_mean,
        "expected the forced variant at or below vanilla at the horizon: {smd_mean} vs {vanilla_mean}"
    );
}

#[test]
fn shipped_configs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::from_path(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 8, "expected the four multimodal and four unimodal grids");
}

#[test]
fn report_missing_trace_lists_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config();
    run_grid(&cfg, tmp.path(), 0).unwrap();
    let victim = tmp.path().join("traces/langevin/square-d3/run_2.csv");
    std::fs::remove_file(&victim).unwrap();
    match load_results(tmp.path()) {
        Err(mkvopt::Error::MissingTraces(gaps)) => {
            assert_eq!(gaps, vec![String::from("traces/langevin/square-d3/run_2.csv")]);
        }
        other => panic!("expected missing traces, got {other:?}"),
    }
}
