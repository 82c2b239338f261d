mod args;
mod commands;
mod data;
mod error;
mod meta;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("LAVA_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::input(format!("LAVA_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot start {threads} threads: {e}")))
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Tune(a) => commands::tune(a),
        Command::RiskCurve(a) => commands::risk_curve(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bounds(a) => commands::bounds(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors, matching the input-error code.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lava: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
