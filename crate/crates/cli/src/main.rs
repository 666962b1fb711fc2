use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mismo::datagen::{preset, write_long_csv};
use mismo::experiment::{
    compare_run, export_traces, run_experiment, write_outputs, ExperimentConfig, Profile,
    RunOptions,
};

/// Multi-step-ahead forecasting experiments with searched horizon partitions.
#[derive(Debug, Parser)]
#[command(name = "mismo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a simulated preset (e.g. logistic-20, mackey-glass-3) as long CSV.
    Generate {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write records and tables into a directory.
    Run {
        /// TOML config with dotted keys; overrides the chosen profile.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base profile: `paper` or `desk`.
        #[arg(long)]
        profile: Option<Profile>,
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress per-unit progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Recompute every table from a run's records and check the stored CSVs.
    Compare {
        #[arg(long)]
        run: PathBuf,
    },
    /// Export per-generation convergence traces and a timing summary.
    Trace {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { preset: name, out } => {
            let series = match preset::<f64>(&name) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            if let Err(e) = write_long_csv(&out, &series) {
                return fail(EXIT_PARTIAL, e);
            }
            println!("wrote {} series to {}", series.len(), out.display());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            profile,
            out,
            workers,
            seed,
            quiet,
        } => {
            let cfg = match &config {
                Some(path) => ExperimentConfig::from_file(path, profile),
                None => Ok(ExperimentConfig::profile(profile.unwrap_or(Profile::Desk))),
            };
            let mut cfg = match cfg {
                Ok(c) => c,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Err(e) = cfg.validate() {
                return fail(EXIT_CONFIG, e);
            }
            let output = match run_experiment(&cfg, RunOptions { workers, progress: !quiet }) {
                Ok(o) => o,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let tables = match write_outputs(&out, &cfg, &output) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_PARTIAL, e),
            };
            println!("{} records written to {}", output.records.len(), out.display());
            println!("{:<16} {:>14} {:>12}", "strategy", "hold-out MSE", "avg rank");
            for m in &tables.mse {
                let rank = tables
                    .overall_ranks
                    .iter()
                    .find(|r| r.dataset == m.dataset && r.strategy == m.strategy)
                    .map_or(f64::NAN, |r| r.average_rank);
                println!("{:<16} {:>14.6e} {:>12.3}", m.strategy, m.mean_mse, rank);
            }
            let failures = output.failures();
            if failures > 0 {
                eprintln!("{failures} of {} runs failed; see records.jsonl", output.records.len());
                return ExitCode::from(EXIT_PARTIAL);
            }
            ExitCode::SUCCESS
        }
        Command::Compare { run } => match compare_run(&run) {
            Ok(report) if report.consistent() => {
                println!("consistent (max |diff| {:.3e})", report.max_abs_diff);
                ExitCode::SUCCESS
            }
            Ok(report) => {
                for m in &report.mismatches {
                    eprintln!("mismatch: {m}");
                }
                ExitCode::from(EXIT_PARTIAL)
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
        Command::Trace { run, out } => match export_traces(&run, &out) {
            Ok(files) => {
                println!("wrote {} traces to {}", files.len(), out.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
    }
}
