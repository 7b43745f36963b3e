//! Scenario runner: `run <config.json> [--out DIR] [--seed N]` and
//! `validate <config.json>`.
//!
//! Exit codes: 0 ok, 1 configuration error, 2 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracaaa::error::Error;
use fracaaa::scenario::{run_scenario, write_artifacts, ScenarioConfig};

#[derive(Parser)]
#[command(name = "fracaaa", version, about = "Fractional integro-differential scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.json plus CSV traces.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for sampling-based checks (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and range-check a config without running it.
    Validate { config: PathBuf },
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_config() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match ScenarioConfig::load(&config).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => {
                println!("{}: valid {} config", config.display(), c.scenario.name());
                ExitCode::SUCCESS
            }
            Err(e) => exit_for(&e),
        },
        Command::Run { config, out, seed } => {
            let mut cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out
                .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let artifacts = match run_scenario(&cfg) {
                Ok(a) => a,
                Err(e) => return exit_for(&e),
            };
            match write_artifacts(&artifacts, &dir) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    println!(
                        "{}: {}",
                        cfg.scenario.name(),
                        if artifacts.passed() { "all checks passed" } else { "some checks failed" }
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            }
        }
    }
}
