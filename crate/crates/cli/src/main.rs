//! `heunsym` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage error,
//! 3 library error, 4 integration step failure, 5 I/O error. Failures print a
//! single line `heunsym: error[<tag>]: <message>` to stderr.

mod args;
mod commands;
mod output;
mod verify;

use std::io;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

pub const THREADS_ENV: &str = "HEUNSYM_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Module(heunsym::Error),
    Io(io::Error),
    /// The run completed but at least one check failed.
    Failed,
}

impl From<heunsym::Error> for CliError {
    fn from(e: heunsym::Error) -> Self {
        CliError::Module(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed => 1,
            CliError::Usage(_) => 2,
            CliError::Module(heunsym::Error::StepFailure { .. }) => 4,
            CliError::Module(_) => 3,
            CliError::Io(_) => 5,
        }
    }

    fn line(&self) -> String {
        let one_line = |s: String| s.lines().next().unwrap_or_default().trim().to_string();
        match self {
            CliError::Failed => "error[verification_failed]: one or more checks exceeded their threshold".into(),
            CliError::Usage(m) => format!("error[usage]: {}", one_line(m.clone())),
            CliError::Module(e) => format!("error[{}]: {}", e.tag(), e),
            CliError::Io(e) => format!("error[io]: {}", one_line(e.to_string())),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a second initialisation (tests in one process) is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Polys(a) => commands::polys(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Monodromy(a) => commands::monodromy(&a),
        Command::Continue(a) => commands::continuation(&a),
        Command::Laurent(a) => commands::laurent(&a),
        Command::Josephson(a) => commands::josephson(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            _ => {
                let err = CliError::Usage(e.kind().to_string() + ": " + &first_detail(&e));
                eprintln!("heunsym: {}", err.line());
                return ExitCode::from(err.code());
            }
        },
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("heunsym: {}", e.line());
            ExitCode::from(e.code())
        }
    }
}

/// The message part of a clap error on one line, without usage and tips.
fn first_detail(e: &clap::Error) -> String {
    let text = e.render().to_string();
    text.lines()
        .map(str::trim)
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("tip:"))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
        .trim_start_matches("error:")
        .trim()
        .to_string()
}
