use std::process::ExitCode;

use clap::Parser;
use optobath_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if let Err(e) = &outcome {
        eprintln!("optobath: {e}");
    }
    ExitCode::from(exit_code(&outcome))
}
