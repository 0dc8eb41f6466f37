//! `hahn`: differentiate, integrate, and run variational checks in the Hahn
//! symmetric quantum calculus from the command line.

use std::fs;
use std::io::{IsTerminal, Write};
use std::process::ExitCode;

use clap::Parser;

use hahn_cli::cli::Cli;
use hahn_cli::commands::{self, Failure};
use hahn_cli::config::{Format, RunConfig};

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(args: Cli) -> Result<u8, Failure> {
    let cfg = RunConfig::resolve(&args.global)?;
    let (report, code) = commands::dispatch(&cfg, args.command)?;

    let rendered = match cfg.format {
        Format::Text => report.render_text(use_color(&cfg)),
        Format::Json => report.render_json(),
        Format::Csv => report.render_csv(),
    };

    match &cfg.out {
        Some(path) => fs::write(path, rendered).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", path.display()),
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(rendered.as_bytes());
            let _ = stdout.flush();
        }
    }
    Ok(code)
}

/// ANSI styling only when writing text to an interactive stdout and the
/// user has not opted out via HAHN_NO_COLOR=1.
fn use_color(cfg: &RunConfig) -> bool {
    cfg.out.is_none()
        && std::env::var_os("HAHN_NO_COLOR").is_none_or(|v| v != "1")
        && std::io::stdout().is_terminal()
}
