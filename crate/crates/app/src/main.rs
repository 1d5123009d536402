use std::process::ExitCode;

use clap::Parser;
use cryptocomb_app::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
