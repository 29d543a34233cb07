//! Library half of the `helmholtz` tool: run configuration, the four
//! subcommands and exit codes. Argument parsing lives in the binary.

pub mod commands;
pub mod config;
pub mod exit;

pub use config::RunConfig;
pub use exit::CliError;

/// Worker count: `HELM_THREADS` wins over `--threads`; `None` keeps rayon's default.
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, CliError> {
    let n = match env {
        Some(s) => {
            Some(s.trim().parse::<usize>().map_err(|_| CliError::input(format!("HELM_THREADS={s:?} is not a count")))?)
        }
        None => flag,
    };
    match n {
        Some(0) => Err(CliError::input("thread count must be at least 1")),
        n => Ok(n),
    }
}
