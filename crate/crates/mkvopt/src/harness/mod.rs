//! Benchmark harness: TOML experiment configs, seeded grid execution with
//! paired seeds across methods, CSV trace persistence with a JSON manifest,
//! and table/plot-data reporting.

mod config;
mod grid;
mod plotdata;
mod report;

pub use config::{
    BenchmarkEntry, DynamicsConfig, ExperimentConfig, ExperimentSection, Flags, MethodEntry,
    NoiseConfig,
};
pub use grid::{run_grid, CellRecord, GridSummary, Manifest, RunRecord, TRACE_HEADER};
pub use plotdata::plot_data;
pub use report::{build_report, load_results, print_report, write_report_csv, Report};
