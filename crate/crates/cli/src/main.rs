mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Audit(a) => commands::run_audit(a, a.output.out_dir.as_deref()),
        Command::Curves(a) => commands::run_curves(a, a.output.out_dir.as_deref()),
        Command::Sample(a) => commands::run_sample(a, a.output.out_dir.as_deref()),
        Command::Simulate(a) => commands::run_simulate(a, a.output.out_dir.as_deref()),
        Command::Replay(a) => commands::run_replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
