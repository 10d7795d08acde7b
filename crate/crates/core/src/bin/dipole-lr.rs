use std::process::ExitCode;

use clap::Parser;
use dipole_lr::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
