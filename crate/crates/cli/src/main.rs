//! `anderson-clt`: runs experiment configs and writes CSV reports with JSON sidecars.

mod config;
mod experiments;
mod report;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{load_config, validate, ConfigError};
use report::RunReport;

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

#[derive(Parser)]
#[command(name = "anderson-clt", version, about = "Linear eigenvalue statistics of the Anderson model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: String,
        /// Exit with status 1 when any verdict fails.
        #[arg(long)]
        assert: bool,
        /// Worker threads (0 = all cores); overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Master seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List test functions, single-site distributions and experiment kinds.
    ListCatalog,
    /// Print the config schema with defaults.
    PrintConfigSchema,
}

fn run(path: &str, assert: bool, workers: Option<usize>, seed: Option<u64>, out: PathBuf) -> ExitCode {
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let workers = workers.unwrap_or(cfg.workers);
    let experiment = match validate(cfg) {
        Ok(e) => e,
        Err(e) => return config_failure(&e),
    };
    let start = Instant::now();
    let table = match anderson_clt::parallel::with_workers(workers, || experiments::run(&experiment)) {
        Ok(Ok(t)) => t,
        Ok(Err(e)) | Err(e) => {
            eprintln!(
                "compute error in {path} (kind {}, master_seed {}): {e}",
                experiment.kind.name(),
                experiment.config.master_seed
            );
            return ExitCode::from(EXIT_COMPUTE);
        }
    };
    let report = RunReport {
        table,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        workers,
    };
    let (csv, json) = match report.write(&experiment, &out) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot write report under {}: {e}", out.display());
            return ExitCode::from(EXIT_COMPUTE);
        }
    };
    println!("wrote {} and {}", csv.display(), json.display());
    for v in &report.table.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    if (assert || experiment.config.assert) && !report.table.all_passed() {
        return ExitCode::from(EXIT_ASSERTION);
    }
    ExitCode::SUCCESS
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            assert,
            workers,
            seed,
            out,
        } => run(&config, assert, workers, seed, out),
        Command::ListCatalog => {
            print!("{}", schema::catalog_listing());
            ExitCode::SUCCESS
        }
        Command::PrintConfigSchema => {
            print!("{}", schema::CONFIG_SCHEMA);
            ExitCode::SUCCESS
        }
    }
}
