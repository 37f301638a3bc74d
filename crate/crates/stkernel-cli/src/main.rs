mod commands;
mod config;
mod error;
mod io;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stkernel::Parallelism;

use crate::commands::RunEnv;
use crate::error::CliError;

/// Batch front end for the stkernel space-time covariance engine.
#[derive(Debug, Parser)]
#[command(name = "stkernel", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, required_unless_present = "schema")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Omit the timestamp from the metadata sidecar.
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads; falls back to STKERNEL_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the configuration schema with defaults and exit.
    #[arg(long)]
    schema: bool,
}

fn threads(cli: &Cli) -> Result<Option<usize>, CliError> {
    let n = match cli.threads {
        Some(n) => Some((n, "--threads")),
        None => match std::env::var("STKERNEL_THREADS") {
            Ok(s) if !s.trim().is_empty() => {
                let n = s
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::config("STKERNEL_THREADS", format!("not a thread count: {s:?}")))?;
                Some((n, "STKERNEL_THREADS"))
            }
            _ => None,
        },
    };
    match n {
        Some((0, field)) => Err(CliError::config(field, "thread count must be positive")),
        Some((n, _)) => Ok(Some(n)),
        None => Ok(None),
    }
}

#[cfg(feature = "parallel")]
fn configure_pool(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("--threads", e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_: Option<usize>) -> Result<(), CliError> {
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.schema {
        println!("{}", serde_json::to_string_pretty(&schema::schema()).expect("schema serializes"));
        return Ok(());
    }
    let path = cli.config.clone().expect("required by clap");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
    let mut cfg = config::parse(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or_else(|| std::path::Path::new(".")));
    let n = threads(&cli)?;
    configure_pool(n)?;
    let policy = if n == Some(1) { Parallelism::Sequential } else { Parallelism::Parallel };
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let env = RunEnv { out, seed: cli.seed, timestamp: !cli.no_timestamp, policy, threads: n };
    commands::run(&cfg, &env)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
