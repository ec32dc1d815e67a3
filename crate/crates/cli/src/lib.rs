//! Batch front end for the `hexlat` numerical lab.
//!
//! Each subcommand runs one experiment and writes CSV/JSON artifacts into the
//! output directory. Exit codes: 0 success, 2 invalid input, 3 a check that
//! ran and failed (certification, classification, Picard divergence).

mod args;
mod commands;
mod grid;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use args::{Cli, Command, ConfigFile, Overlay};
pub use commands::{sweep_velocities, Failure, DEFAULT_SEED, GENERATOR, SPECIAL_VELOCITIES};
pub use grid::{parse_pair, parse_time_grid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Environment variable giving the default worker count.
pub const THREADS_ENV: &str = "HEXLAT_THREADS";

fn load_config(path: Option<&PathBuf>) -> Result<ConfigFile, Failure> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))
        }
    }
}

fn threads(flag: Option<usize>, config: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag.or(config) {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map_err(|_| Failure::Invalid(format!("{THREADS_ENV}='{s}' is not a thread count"))),
        _ => Ok(0),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let config = load_config(cli.config.as_ref())?;
    let ctx = commands::Context {
        out: cli.out.or(config.out).unwrap_or_else(|| PathBuf::from("out")),
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads(cli.threads, config.threads)?)
        .build()
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Kernel(a) => commands::kernel(&ctx, a.overlay(config.kernel)),
        Command::Decay(a) => commands::decay(&ctx, a.overlay(config.decay)),
        Command::Fit(a) => commands::fit(&ctx, a.overlay(config.fit)),
        Command::Phase(a) => commands::phase(&ctx, a.overlay(config.phase)),
        Command::Curves(a) => commands::curves(&ctx, a.overlay(config.curves)),
        Command::Certify(a) => commands::certify(&ctx, a.overlay(config.certify)),
        Command::Newton(a) => commands::newton(&ctx, a.overlay(config.newton)),
        Command::Dnls(a) => commands::dnls(&ctx, a.overlay(config.dnls)),
        Command::Report(a) => commands::report(&ctx, a.overlay(config.report)),
    })
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            EXIT_CHECK_FAILED
        }
    }
}
