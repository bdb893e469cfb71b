//! `masep`: build integrable multi-species ASEP boundaries, verify their
//! algebraic identities exactly, and solve or simulate the open chain.

mod commands;
mod options;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use commands::Command;
use options::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "masep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("MASEP_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .with_context(|| format!("MASEP_THREADS={value:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let cfg = RunConfig::resolve(cli.command.flags())?;
    let (out, csv_path) = (cfg.out.clone(), cfg.csv.clone());
    let outcome = cli.command.run(cfg)?;
    let mut json = serde_json::to_string_pretty(&outcome.envelope)?;
    json.push('\n');
    match out {
        Some(path) => std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    if let (Some(path), Some(csv)) = (csv_path, &outcome.csv) {
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    if !outcome.passed {
        eprintln!("{}: check failed, details in the report", outcome.envelope.command);
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
