//! Entry point of the `pilot` binary.

use std::process::ExitCode;

use clap::Parser;
use pilot_cli::Cli;

fn main() -> ExitCode {
    match pilot_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
