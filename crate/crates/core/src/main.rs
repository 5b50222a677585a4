use std::process::ExitCode;

use clap::Parser;

use aptree::cli::{run, Cli, EXIT_INVALID};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}
