use std::process::ExitCode;

use clap::Parser;
use dynembed::cli::{self, Cli};

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli::configure_threads().and_then(|_| cli::run(parsed)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dynembed: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
