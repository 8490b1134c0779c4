mod args;
mod commands;
mod config;
mod registry;
mod settings;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, provider or model setup.
    Config(String),
    /// Unreadable or unparsable input, or unwritable output.
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Input(m) => f.write_str(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("SKOSMT_LOG")
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Translate(a) => commands::translate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Providers(a) => commands::providers(a),
        Command::Cache(a) => commands::cache(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
