use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use qsec_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line: Vec<String> = std::env::args().skip(1).collect();
    let outcome = match run(&cli, &command_line) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.output).map_err(|e| format!("writing {}: {e}", path.display())),
        None => std::io::stdout().write_all(&outcome.output).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    if outcome.hard_failure {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
