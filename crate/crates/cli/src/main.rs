//! `ltmle`: classical and log-truncated MLE fits, tail bounds, β tuning,
//! Orlicz-type norms and Monte Carlo checks, driven by a TOML run file.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ltmle_core::harness::Execution;

use crate::commands::{dispatch, CliError, Output};
use crate::config::{parse_config, Command};

#[derive(Parser)]
#[command(name = "ltmle", version, about)]
struct Cli {
    /// Run file (TOML). Required by every subcommand except `reference`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for the JSON result and CSV curves.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for Monte Carlo runs; output does not depend on it.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,

    /// Master seed, overriding `run.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the MLE, and with --robust the truncated estimator and its band.
    Fit {
        #[arg(long)]
        robust: bool,
    },
    /// MLE tail bound against a simulated tail; writes bounds.csv.
    Bounds,
    /// Optimal β, half-width and sample-size condition.
    Tune,
    /// θ₁ and θ₂ norms of data or of a model.
    Norms,
    /// Monte Carlo experiment; tail runs write tail.csv.
    Simulate,
    /// Print the configuration reference page.
    Reference,
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let command = match cli.command {
        Cmd::Fit { robust } => Command::Fit { robust },
        Cmd::Bounds => Command::Bounds,
        Cmd::Tune => Command::Tune,
        Cmd::Norms => Command::Norms,
        Cmd::Simulate => Command::Simulate,
        Cmd::Reference => unreachable!("handled in main"),
    };
    let path = cli
        .config
        .ok_or_else(|| CliError::Input(format!("`{}` needs --config PATH", command.name())))?;
    let mut cfg = parse_config(&path, command)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.out {
        cfg.out_dir = Some(dir);
    }
    let workers = cli.workers.map(|w| w as usize).or(cfg.workers);
    let exec = workers.map_or_else(Execution::default, Execution::with_workers);
    let output = dispatch(&cfg, exec)?;
    if let Some(dir) = &cfg.out_dir {
        write_files(dir, command.name(), &output)?;
    }
    Ok(output)
}

fn write_files(dir: &Path, name: &str, output: &Output) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{name}.json")), render(output)).map_err(io)?;
    for (file, contents) in &output.csv {
        std::fs::write(dir.join(file), contents).map_err(io)?;
    }
    Ok(())
}

fn render(output: &Output) -> String {
    let mut s = serde_json::to_string_pretty(&output.json).expect("JSON values always encode");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Reference = cli.command {
        print!("{}", config::reference_page());
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(output) => {
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(render(&output).as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
