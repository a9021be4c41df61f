//! `capwater` command-line front end.

mod args;
mod commands;
mod error;
mod output;
mod records;

use clap::Parser;

use args::Cli;
use error::CliError;

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CAPWATER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("CAPWATER_THREADS must be a nonnegative integer, got {value:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() {
    // argument errors share exit code 1 with other usage errors
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            std::process::exit(1);
        }
        Err(e) => e.exit(),
    };
    let result = configure_threads()
        .and_then(|_| commands::run(&cli))
        .and_then(|bytes| output::write_output(&bytes, cli.common.output.as_deref()));
    if let Err(e) = result {
        eprintln!("error[{}]: {e}", e.code());
        std::process::exit(e.exit_code());
    }
}
