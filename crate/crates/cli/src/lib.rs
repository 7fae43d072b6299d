//! Command-line front end for the `depthrank` library.
//!
//! Reports go to stdout; failures print a JSON error document to stderr and
//! exit with 2 (usage), 3 (data) or 4 (numerical degeneracy).

pub mod args;
pub mod commands;
pub mod data;
pub mod error;

use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use error::{CliError, CliResult};

/// Runs a parsed command line, writing the report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    use args::Command;
    match &cli.command {
        Command::Depth(a) => commands::depth(a, out),
        Command::Qtest(a) => commands::qtest(a, out),
        Command::Competitor(a) => commands::competitor(a, out),
        Command::Power(a) => commands::power(a, out),
        Command::Reproduce(a) => commands::reproduce(a, out),
    }
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    let Some(n) = threads else { return Ok(()) };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

/// Process entry point; returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run(&cli, &mut lock)?;
        lock.flush().map_err(|e| CliError::File { path: "<stdout>".into(), message: e.to_string() })
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
