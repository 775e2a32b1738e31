use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use heun_cli::commands::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(&cli);
    if let Some(doc) = &outcome.document {
        match &outcome.output_path {
            Some(path) => {
                if let Err(e) = std::fs::write(path, doc) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(doc.as_bytes()).is_err() {
                    return ExitCode::from(3);
                }
                if !doc.ends_with('\n') {
                    let _ = stdout.write_all(b"\n");
                }
            }
        }
    }
    if let Some(message) = &outcome.error_message {
        eprintln!("error: {message}");
    }
    ExitCode::from(outcome.exit_code)
}
