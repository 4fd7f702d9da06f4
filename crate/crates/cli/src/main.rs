//! `modent` command-line interface.

mod args;
mod commands;
mod config;
mod error;
mod output;
mod recipes;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn execute(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(path) => config::load(path)?,
        None => config::Settings::default(),
    };
    let mut settings = config::merge(cli, file);
    if let Some(n) = settings.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    let outcome = commands::run(&mut settings)?;
    let many = matches!(cli.command, Command::Fig { .. });
    output::emit(
        settings.out.as_deref(),
        cli.global.out_dir.as_deref(),
        many,
        &outcome.artifacts,
    )?;
    outcome.failure.map_or(Ok(()), Err)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.json_line());
            std::process::exit(err.exit_code());
        }
    };
    if let Err(err) = execute(&cli) {
        eprintln!("error: {}", err.message());
        eprintln!("{}", err.json_line());
        std::process::exit(err.exit_code());
    }
}
