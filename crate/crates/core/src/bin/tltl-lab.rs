use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tltl_lab::harness::{
    emit_outputs, eval_formula_on_trace, grid_search_continuous, run_experiment, ExperimentConfig,
    HarnessError,
};
use tltl_lab::semantics::RobustnessConfig;

/// Learning experiments on the planar arm benchmark.
#[derive(Parser)]
#[command(name = "tltl-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write its learning curve.
    Run {
        #[command(flatten)]
        common: RunArgs,
        /// Comma-separated seeds, replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Grid search over the continuous reward coefficients.
    Grid {
        #[command(flatten)]
        common: RunArgs,
    },
    /// Evaluate a formula on a CSV trace and print the verdict as JSON.
    Eval(EvalArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Shorter horizon and fewer iterations.
    #[arg(long)]
    fast: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Formula text, or a path to a file containing it.
    #[arg(long)]
    formula: String,
    /// CSV trace with a header row of feature names.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    rho_max: f64,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.fast |= args.fast;
    Ok(cfg)
}

fn eval(args: &EvalArgs) -> Result<(), HarnessError> {
    let cfg = RobustnessConfig::new(args.rho_max).map_err(|e| HarnessError::Config(e.to_string()))?;
    let verdict = eval_formula_on_trace(&args.formula, &args.trace, &cfg)?;
    println!("{}", serde_json::to_string(&verdict)?);
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { common, seeds } => {
            let mut cfg = load(&common)?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            let exp = cfg.resolve()?;
            let curve = run_experiment(&exp)?;
            emit_outputs(&curve, &exp, &common.out)?;
            if !curve.is_empty() {
                eprintln!(
                    "{} iterations over {} seeds; final mean robustness {:.4}",
                    curve.len(),
                    curve.seeds.len(),
                    curve.mean[curve.len() - 1]
                );
            }
        }
        Command::Grid { common } => {
            let exp = load(&common)?.resolve()?;
            let result = grid_search_continuous(&exp, Some(&common.out))?;
            let best = result.best_cell();
            eprintln!(
                "best of {} cells: c1={} c2={} c3={} (final-10 mean robustness {:.4})",
                result.cells.len(),
                best.coefficients.c1,
                best.coefficients.c2,
                best.coefficients.c3,
                best.score
            );
        }
        Command::Eval(args) => eval(&args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
