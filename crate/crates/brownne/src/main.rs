use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use brownne::config::Config;
use brownne::experiments::{self, RunError, Subcommand};

/// Runs one experiment and writes its tables into the output directory.
#[derive(Parser, Debug)]
#[command(name = "brownne", version)]
struct Cli {
    /// ndd-convergence, moments, brownian-verify, iam, mlp-train or biased-gd
    subcommand: Subcommand,
    /// key = value file; every key is optional
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// also draw SVG line charts
    #[arg(long)]
    svg: bool,
    /// check the configuration, print the effective one and exit
    #[arg(long)]
    check: bool,
}

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

fn threads() -> Result<Option<usize>, String> {
    match std::env::var("BROWNNE_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("BROWNNE_THREADS must be a positive integer, got {s:?}")),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CONFIG_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match threads() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("brownne: {e}");
                return ExitCode::from(RUNTIME_ERROR);
            }
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("brownne: {msg}");
            return ExitCode::from(CONFIG_ERROR);
        }
    }
    let cfg = match &cli.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    };
    let (cfg, effective) = match cfg.and_then(|c| experiments::validate(cli.subcommand, &c).map(|e| (c, e))) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("brownne {}: {e}", cli.subcommand);
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if cli.check {
        print!("{effective}");
        return ExitCode::SUCCESS;
    }
    let result = experiments::run(cli.subcommand, &cfg, cli.seed)
        .and_then(|out| experiments::write_output(&out, &cli.out, cli.seed, cli.svg));
    match result {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("brownne: warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Config(e)) => {
            eprintln!("brownne {}: {e}", cli.subcommand);
            ExitCode::from(CONFIG_ERROR)
        }
        Err(e) => {
            eprintln!("brownne {}: {e}", cli.subcommand);
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
