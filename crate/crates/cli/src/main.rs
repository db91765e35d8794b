use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(weyl_bvp_cli::execute(&weyl_bvp_cli::Args::parse()))
}
