use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = nlphase_cli::Cli::parse();
    ExitCode::from(nlphase_cli::run(&cli))
}
