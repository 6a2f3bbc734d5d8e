use clap::{Parser, Subcommand};
use mkvopt::harness::{
    build_report, load_results, plot_data, print_report, run_grid, write_report_csv,
    ExperimentConfig,
};
use mkvopt::objectives;
use mkvopt::Error;
use std::path::PathBuf;
use std::process::ExitCode;

// exit statuses
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_MISSING: u8 = 4;
const EXIT_GRID: u8 = 5;

#[derive(Parser)]
#[command(name = "mkvopt", version, about = "Particle-based global optimization benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the full seeded grid described by a TOML experiment config.
    Run {
        /// Experiment config file.
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads for the grid; 0 means all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print comparison tables for a results directory and write report CSVs.
    Report {
        /// Results directory produced by `run`.
        dir: PathBuf,
    },
    /// Emit per-iteration mean/std convergence curves as CSV.
    PlotData {
        /// Results directory produced by `run`.
        dir: PathBuf,
        /// Benchmark key, e.g. `levy-d20`.
        #[arg(long)]
        benchmark: String,
        /// Comma-separated method ids.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the objective registry.
    ListObjectives,
}

fn main() -> ExitCode {
    env_logger_init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        // a closed stdout (e.g. piping into `head`) is not an error
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::UnknownObjective(_)
                | Error::BadDimension { .. } => EXIT_CONFIG,
                Error::MissingTraces(_) => EXIT_MISSING,
                Error::MismatchedGrid(_) => EXIT_GRID,
                _ => 1,
            })
        }
    }
}

fn env_logger_init() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
}

fn dispatch(cli: Cli) -> mkvopt::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            output,
            jobs,
            seed,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.experiment.base_seed = seed;
            }
            let out_dir = output
                .or_else(|| cfg.experiment.output.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(format!("results/{}", cfg.experiment.name)));
            let summary = run_grid(&cfg, &out_dir, jobs)?;
            println!(
                "{} runs ({} diverged); manifest at {}",
                summary.total_runs,
                summary.diverged_runs,
                summary.manifest_path.display()
            );
            if summary.divergence_threshold_exceeded {
                eprintln!("divergence threshold exceeded; partial results preserved");
                return Ok(ExitCode::from(EXIT_DIVERGED));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let loaded = load_results(&dir)?;
            let report = build_report(&loaded)?;
            print_report(&report, &mut std::io::stdout())?;
            write_report_csv(&report, &dir)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PlotData {
            dir,
            benchmark,
            methods,
            output,
        } => {
            match output {
                Some(path) => {
                    let mut f = std::fs::File::create(path)?;
                    plot_data(&dir, &benchmark, &methods, &mut f)?;
                }
                None => plot_data(&dir, &benchmark, &methods, &mut std::io::stdout())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListObjectives => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "{:<18}{:>8}  {:<24}known minimum", "name", "min-dim", "domain")?;
            for &name in objectives::registry_names() {
                let mindim = objectives::min_dim(name).expect("registry name");
                let obj = objectives::make_objective(name, mindim.max(2))?;
                let (lo, hi) = obj.domain[0];
                let domain = if name == "trid" {
                    String::from("[-d^2, d^2]")
                } else {
                    format!("[{lo}, {hi}]")
                };
                let min_desc = match name {
                    "styblinski-tang" => {
                        format!("{:.6} * d", obj.known_min_value / obj.dim as f64)
                    }
                    "trid" => String::from("-d(d+4)(d-1)/6"),
                    _ => format!("{:.6}", obj.known_min_value),
                };
                writeln!(out, "{name:<18}{mindim:>8}  {domain:<24}{min_desc}")?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
