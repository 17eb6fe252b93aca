mod error;
mod options;
mod run;

use std::process::ExitCode;

use clap::Parser;

use error::CliError;
use options::Cli;

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("AOE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("AOE_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aoe: {e}");
            e.exit_code()
        }
    }
}
