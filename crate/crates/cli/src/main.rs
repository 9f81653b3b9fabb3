mod commands;
mod config;
mod error;
mod init;

use std::process::ExitCode;

use config::RunConfig;
use error::CliError;

fn main() -> ExitCode {
    let result = RunConfig::load(std::env::args_os()).and_then(|c| commands::run(&c));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("thinplate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
