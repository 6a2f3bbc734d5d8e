//! The full harness pipeline in one program: define an experiment grid,
//! execute it with paired seeds, print the comparison table, and emit
//! convergence-curve data — the library-side equivalent of
//! `mkvopt run && mkvopt report && mkvopt plot-data`.
//!
//! ```sh
//! cargo run --release --example benchmark_grid
//! ```

use mkvopt::harness::{build_report, load_results, plot_data, print_report, run_grid, ExperimentConfig};

const EXPERIMENT: &str = r#"
[experiment]
name = "demo-grid"
n_particles = 40
n_iters = 150
dt = 0.1
n_runs = 8
base_seed = 31

[[benchmarks]]
name = "rastrigin"
dim = 6

[[benchmarks]]
name = "levy"
dim = 6

[[methods]]
id = "cbo"
dynamics = { family = "cbo" }
noise = { kind = "none" }

[[methods]]
id = "smd-cbo-mean"
dynamics = { family = "cbo" }
noise = { kind = "smd", observable = "mean" }

[[methods]]
id = "smd-cbo-meanvar"
dynamics = { family = "cbo" }
noise = { kind = "smd", observable = "mean-plus-variance" }

[[methods]]
id = "gcn-cbo"
dynamics = { family = "cbo" }
noise = { kind = "gcn", bandwidth = 1.0 }
"#;

fn main() -> mkvopt::Result<()> {
    let cfg: ExperimentConfig = toml::from_str(EXPERIMENT).expect("embedded config parses");
    cfg.validate()?;

    let out = std::env::temp_dir().join("mkvopt-demo-grid");
    let summary = run_grid(&cfg, &out, 0)?;
    println!(
        "executed {} runs ({} diverged) into {}\n",
        summary.total_runs,
        summary.diverged_runs,
        out.display()
    );

    let loaded = load_results(&out)?;
    let report = build_report(&loaded)?;
    print_report(&report, &mut std::io::stdout())?;

    println!("first convergence rows (levy-d6, cbo vs smd-cbo-mean):");
    let mut csv = Vec::new();
    plot_data(
        &out,
        "levy-d6",
        &["cbo".into(), "smd-cbo-mean".into()],
        &mut csv,
    )?;
    for line in String::from_utf8(csv).unwrap().lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
