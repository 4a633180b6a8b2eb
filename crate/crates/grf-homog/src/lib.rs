//! File formats, thread-parallel drivers and the `grf-homog` command line
//! front end over [`grf_homog_core`].
//!
//! Every command writes one JSON (or CSV) document and maps its outcome to
//! an exit status: 0 pass, 1 failed check, 2 usage or configuration error,
//! 3 numerical failure.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod space;
pub mod tables;

use std::ffi::OsString;

use clap::Parser;

pub use error::{CliError, CliResult, ExitStatus};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GRF_HOMOG_THREADS";

/// A pool honouring [`THREADS_ENV`] (rayon's default when unset).
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer (got {v:?})")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::usage(e.to_string()))
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Usage } else { ExitStatus::Pass };
        }
    };
    match cli::load(cli).and_then(|cmd| commands::dispatch(&cmd)) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("error: {}", err.message);
            err.status
        }
    }
}
