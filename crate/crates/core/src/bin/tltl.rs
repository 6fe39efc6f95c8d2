use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tltl_lab::harness::{eval_formula_on_trace, HarnessError};
use tltl_lab::semantics::RobustnessConfig;

/// Evaluate TLTL formulas on recorded traces.
#[derive(Parser)]
#[command(name = "tltl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print `{"sat": bool, "rho": number}` for a formula on a CSV trace.
    Eval {
        /// Formula text, or a path to a file containing it.
        #[arg(long)]
        formula: String,
        /// CSV trace with a header row of feature names.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        rho_max: f64,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let Command::Eval { formula, trace, rho_max } = cli.command;
    let cfg = RobustnessConfig::new(rho_max).map_err(|e| HarnessError::Config(e.to_string()))?;
    let verdict = eval_formula_on_trace(&formula, &trace, &cfg)?;
    println!("{}", serde_json::to_string(&verdict)?);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
