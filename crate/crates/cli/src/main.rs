//! `wavered` command-line front end.
//!
//! Exit codes: 0 pass, 1 failed check or solver error, 2 bad input,
//! 3 undecided.

mod common;
mod compat_cmd;
mod lift_cmd;
mod solve;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::{CmdResult, Settings};

#[derive(Parser, Debug)]
#[command(name = "wavered", version, about = "Reduce the nonlinear wave equation to two variables and check the result")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized test.
    #[arg(long, global = true, env = "WAVERED_SEED", default_value_t = 0x5eed)]
    seed: u64,
    /// Sample points per identity test.
    #[arg(long, global = true, default_value_t = 200)]
    trials: usize,
    /// Absolute tolerance of identity tests (scaled by term magnitude).
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute and check the reduction invariants of an ansatz.
    VerifyAnsatz(verify::VerifyArgs),
    /// Check the necessary conditions of a canonical system.
    CheckCompat(compat_cmd::CompatArgs),
    /// Solve a reduced equation on a grid.
    Solve(solve::SolveArgs),
    /// Measure the residual of a reduced solution in four dimensions.
    Lift(lift_cmd::LiftArgs),
}

fn dispatch(cli: &Cli) -> CmdResult {
    if cli.trials == 0 {
        return Err(common::input(anyhow::anyhow!("--trials must be positive")));
    }
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(common::input(anyhow::anyhow!("--tol must be positive")));
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(common::run)?;
    }
    let settings = Settings { json: cli.json, seed: cli.seed, trials: cli.trials, tol: cli.tol };
    match &cli.command {
        Command::VerifyAnsatz(a) => verify::cmd_verify_ansatz(a, &settings),
        Command::CheckCompat(a) => compat_cmd::cmd_check_compat(a, &settings),
        Command::Solve(a) => solve::cmd_solve(a, &settings),
        Command::Lift(a) => lift_cmd::cmd_lift(a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
