//! `wunt` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration, 3 input schema, 4 numerical
//! failure (no overlap, logistic fit failure), 5 I/O.

mod args;
mod commands;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let cfg = commands::build_config(&cli.config)?;
    match &cli.command {
        Command::Estimate(a) => commands::estimate(a, &cfg, cli.format),
        Command::Transform(a) => commands::transform(a, &cfg),
        Command::Simulate(a) => commands::simulate(a, &cfg, cli.format),
        Command::Bench(a) => commands::bench(a, &cfg, cli.format),
        Command::DemoWarmup(a) => commands::demo_warmup(a, cli.format),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        if cli.error_json {
            eprintln!("{}", e.to_json());
        } else {
            eprintln!("error: {e}");
        }
        std::process::exit(e.class().exit_code());
    }
}
