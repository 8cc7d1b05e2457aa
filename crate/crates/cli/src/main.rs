//! `dde-expand`: command-line front end for the expansion-strategy toolkit.
//!
//! Exit status is 0 on success, 2 for invalid input or usage and 3 when a
//! computation fails.

mod args;
mod commands;
mod output;
mod showcase;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = match &cli.command {
        Command::CheckPoly(a) => commands::check_poly(a, &cli.global)?,
        Command::Jury(a) => commands::jury(a, &cli.global)?,
        Command::Expand(a) => commands::expand(a, &cli.global)?,
        Command::ClassifyLocal(a) => commands::classify_local(a, &cli.global)?,
        Command::Orbit(a) => commands::orbit(a, &cli.global)?,
        Command::Ricker(a) => commands::ricker(a, &cli.global)?,
        Command::Clark(a) => commands::clark(a, &cli.global)?,
        Command::Sweep(a) => return commands::sweep(a, &cli.global),
        Command::Example(a) => showcase::run(a.name, &cli.global)?,
    };
    out.emit(&cli.global)
}
