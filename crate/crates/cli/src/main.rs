use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use helmholtz_cli::commands::{self, Outcome};
use helmholtz_cli::exit::{CliError, INPUT_ERROR, OK};
use helmholtz_cli::{thread_count, RunConfig};

/// Helmholtz decomposition on perturbed half spaces.
///
/// Exit codes: 0 ok, 2 smallness gate failed, 3 tolerance breached, 4 input error.
#[derive(Debug, Parser)]
#[command(name = "helmholtz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON). Omitted fields take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for reports and output fields.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; the HELM_THREADS environment variable takes precedence.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Neumann series stopping tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Neumann series term cap.
    #[arg(long, global = true, value_name = "N")]
    kmax: Option<usize>,
    /// C*(n) for the symbolic smallness condition.
    #[arg(long, global = true, value_name = "X")]
    cstar: Option<f64>,
    /// Seed of the sampled oscillation estimators.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the smallness constants and the empirical norm of 2S.
    CheckSmallness,
    /// Run the boundary identity suite on the configured geometry.
    VerifyIdentities,
    /// Norm ledger of a field file, or of the configured preset field.
    Norms { field: Option<PathBuf> },
    /// Decompose a field file, or the configured preset field.
    Decompose { field: Option<PathBuf> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::CheckSmallness => "check-smallness",
            Self::VerifyIdentities => "verify-identities",
            Self::Norms { .. } => "norms",
            Self::Decompose { .. } => "decompose",
        }
    }
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(x) = cli.tol {
        cfg.tol = x;
    }
    if let Some(k) = cli.kmax {
        cfg.kmax = k;
    }
    if let Some(c) = cli.cstar {
        cfg.cstar_n = Some(c);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let env = std::env::var("HELM_THREADS").ok();
    if let Some(n) = thread_count(cli.threads, env.as_deref())? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::input(e.to_string()))?;
    }
    let cfg = configure(cli)?;
    let out = cfg.output.as_deref();
    let outcome = match &cli.command {
        Command::CheckSmallness => commands::check_smallness(&cfg)?,
        Command::VerifyIdentities => commands::verify_identities(&cfg)?,
        Command::Norms { field } => commands::norms(&cfg, field.as_deref())?,
        Command::Decompose { field } => commands::decompose(&cfg, field.as_deref(), out)?,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&outcome.report).map_err(|e| CliError::input(e.to_string()))?;
        fs::write(commands::report_path(dir, cli.command.name()), text + "\n")?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.report).expect("reports are plain JSON"));
            if outcome.code != OK {
                eprintln!("{}: finished with exit code {}", cli.command.name(), outcome.code);
                if let Some(checks) = outcome.report.pointer("/checks/checks").and_then(|c| c.as_array()) {
                    for c in checks.iter().filter(|c| c["passed"] == false) {
                        eprintln!(
                            "  failed: {} (residual {} >= tolerance {})",
                            c["name"], c["residual"], c["tolerance"]
                        );
                    }
                }
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
