//! `roadguard` — run, validate and summarize collision-alert scenarios.
//!
//! Exit codes: 0 on success, 1 when an input (scenario, registry or log
//! file) fails to parse or validate, 2 when a run or output step fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roadguard_core::event_log::EventLog;
use roadguard_core::{runner, scenario, summarize};

#[derive(Parser)]
#[command(
    name = "roadguard",
    version,
    about = "Deterministic V2V collision-alert simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its event log
    Run {
        /// Scenario file to execute
        #[arg(long)]
        scenario: PathBuf,
        /// Where to write the event log
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a scenario, including its responder registry
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Summarize an event log as JSON
    Summarize {
        #[arg(long)]
        log: PathBuf,
    },
}

enum CliError {
    /// Bad input: scenario, registry or log problems. Exit code 1.
    Input(String),
    /// Failure while running or writing results. Exit code 2.
    Runtime(String),
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario: path,
            out,
        } => {
            let loaded = scenario::load(&path).map_err(|e| CliError::Input(e.to_string()))?;
            let log = runner::run(&loaded.scenario, &loaded.registry)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            std::fs::write(&out, log.encode()).map_err(|e| {
                CliError::Runtime(format!("failed to write {}: {e}", out.display()))
            })?;
            println!(
                "{}: {} events over {} ticks -> {}",
                loaded.scenario.name,
                log.len(),
                loaded.scenario.duration_ticks,
                out.display()
            );
            Ok(())
        }
        Command::Validate { scenario: path } => {
            let loaded = scenario::load(&path).map_err(|e| CliError::Input(e.to_string()))?;
            println!(
                "{}: ok ({} vehicles, {} responders, {} ticks)",
                loaded.scenario.name,
                loaded.scenario.vehicles.len(),
                loaded.registry.len(),
                loaded.scenario.duration_ticks
            );
            Ok(())
        }
        Command::Summarize { log } => {
            let text = std::fs::read_to_string(&log)
                .map_err(|e| CliError::Input(format!("failed to read {}: {e}", log.display())))?;
            let parsed = EventLog::parse(&text).map_err(|e| CliError::Input(e.to_string()))?;
            let summary = summarize(&parsed);
            let json = serde_json::to_string_pretty(&summary)
                .map_err(|e| CliError::Runtime(format!("failed to serialize summary: {e}")))?;
            println!("{json}");
            Ok(())
        }
    }
}
