mod args;
mod commands;
mod emit;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ribbonflow::{Error, ExactError};

use args::Cli;
use emit::Status;

const EXIT_CHECK: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_NOT_RENORMALIZABLE: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidParameter(_) | Error::NotGeodesic(_) => EXIT_PARSE,
        Error::Exact(ExactError::Parse { .. }) => EXIT_PARSE,
        Error::OrbitEscapedBudget { .. } | Error::Budget(_) => EXIT_BUDGET,
        Error::NotRenormalizable(_) => EXIT_NOT_RENORMALIZABLE,
        _ => EXIT_CHECK,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let emitted = match commands::run(&cli) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &emitted.body),
        None => std::io::stdout().write_all(emitted.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_CHECK);
    }
    match emitted.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::CheckFailed(why) => {
            eprintln!("check failed: {why}");
            ExitCode::from(EXIT_CHECK)
        }
        Status::NotRenormalizable(why) => {
            eprintln!("not renormalizable: {why}");
            ExitCode::from(EXIT_NOT_RENORMALIZABLE)
        }
    }
}
