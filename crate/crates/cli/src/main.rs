use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use oneloop_cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = run(&cli);
    if !outcome.stdout.is_empty() {
        let _ = writeln!(std::io::stdout().lock(), "{}", outcome.stdout);
    }
    if let Some(msg) = &outcome.stderr {
        eprintln!("error: {msg}");
    }
    ExitCode::from(outcome.code as u8)
}
