//! Batch runner behind the `citelens` binary. [`run`] parses arguments,
//! executes one subcommand and returns the process exit code: 0 on success,
//! 1 for usage errors, 2 for data errors.

pub mod args;
mod commands;
mod output;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
pub use commands::parse_config;
pub use output::CliError;

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };

    let level = if cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("citelens: cannot start worker threads: {e}");
            return 1;
        }
    };

    let ctx = Context {
        command_line: argv.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" "),
        started: commands::now(),
    };
    let result = pool.install(|| match &cli.command {
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Stats(a) => commands::stats(&ctx, a),
        Command::Cascade(a) => commands::cascade(&ctx, a),
        Command::Bias(a) => commands::bias(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("citelens: {e}");
            e.code()
        }
    }
}
