use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use isocorr::cli::{run_with_threads, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_with_threads(&cli) {
        Ok(outcome) => {
            if let Some(w) = &outcome.warning {
                eprintln!("warning: {w}");
            }
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &outcome.text),
                None => std::io::stdout().write_all(outcome.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
