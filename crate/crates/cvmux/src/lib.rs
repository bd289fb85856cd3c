//! Command-line front end: file formats, configuration and the commands
//! built on `cvmux-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{AppError, AppResult};

use config::{Cli, Command};

pub fn run(cli: &Cli) -> AppResult<()> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Decouple(a) => commands::decouple(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => commands::validate(a),
    }
}
