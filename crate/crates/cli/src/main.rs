mod args;
mod run;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{error::ErrorKind, CommandFactory, Parser};

use crate::args::{Cli, Command, Format};
use crate::run::{run, ErrorOut};

fn emit(command: &Command, body: &str) -> io::Result<()> {
    match &command.output().output {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let command = &cli.command;
    if command.output().format == Format::Dot && !matches!(command, Command::Explore { .. }) {
        Cli::command()
            .error(
                ErrorKind::ArgumentConflict,
                format!("--format dot is only valid for explore, not {}", command.name()),
            )
            .exit();
    }

    match run(command) {
        Ok(report) => {
            if let Err(e) = emit(command, &report.body) {
                eprintln!("qsync: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if !command.output().quiet {
                eprintln!("{}", report.summary);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let body = serde_json::to_string(&ErrorOut::from(&e)).expect("error serializes") + "\n";
            let _ = io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(1)
        }
    }
}
