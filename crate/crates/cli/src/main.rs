use std::process::ExitCode;

use clap::Parser;

mod commands;
mod output;

use commands::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(f.code())
        }
    }
}
