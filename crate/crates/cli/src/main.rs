//! `ran-slice-opt`: runs the placement solvers on generated or stored
//! scenarios and writes results, metrics and plot data.

mod args;
mod commands;
mod output;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_NO_INCUMBENT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Validate(a) => commands::validate(a),
        Command::ExportMps(a) => commands::export_mps(a),
        Command::GenTopology(a) => commands::gen_topology(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
