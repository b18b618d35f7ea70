//! `wikityper` command-line entry point: mine typo dictionaries, inject
//! noise, compute corpus statistics, and score clean-vs-noisy gaps.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 I/O or network failure.

mod commands;
mod config;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "wikityper", version, about = "Wikipedia typo mining and noise injection toolkit")]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for parallel stages; never changes the output.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine a typo dictionary from Wikipedia revision histories.
    Mine(commands::mine::MineArgs),
    /// Inject dictionary or keyboard noise into a dataset.
    Inject(commands::inject::InjectArgs),
    /// Corpus statistics for a dataset/injection-report pair.
    Stats(commands::stats::StatsArgs),
    /// Score prediction files and assemble clean-vs-noisy gap reports.
    Eval(commands::eval::EvalArgs),
    /// List the built-in keyboard layouts.
    Layouts,
}

/// A rejected configuration or flag combination; maps to exit code 1, while
/// every other error is an operational failure and maps to exit code 2.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationError {}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ValidationError(message.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // Unknown flags/subcommands: usage text on stderr, exit 1.
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let file_config = match config::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return report(e),
    };
    let workers = cli.workers;

    let result = match cli.command {
        Command::Mine(args) => commands::mine::run(args, &file_config, workers),
        Command::Inject(args) => commands::inject::run(args, &file_config),
        Command::Stats(args) => commands::stats::run(args, &file_config),
        Command::Eval(args) => commands::eval::run(args, &file_config),
        Command::Layouts => {
            for name in wikityper::keyboard_noise::builtin_layout_names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(error: anyhow::Error) -> ExitCode {
    eprintln!("error: {error:#}");
    if error.is::<ValidationError>() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}
