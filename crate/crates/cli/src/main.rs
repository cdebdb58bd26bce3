use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ssmlab_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let written = if text.is_empty() || text.ends_with('\n') {
                out.write_all(text.as_bytes())
            } else {
                writeln!(out, "{text}")
            };
            if let Err(e) = written.and_then(|_| out.flush()) {
                eprintln!("ssmlab: i/o error: {e}");
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ssmlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
