//! urlab: evaluate, sweep, fuzz and minimize uncertainty relations from
//! TOML scenario files.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Overrides;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "urlab", version, about = "uncertainty-relation laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Worker threads for batteries and sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Override the saturation tolerance.
    #[arg(long, global = true)]
    tol_sat: Option<f64>,
    /// Override the numerical floor.
    #[arg(long, global = true)]
    floor: Option<f64>,
    /// Directory for report files; stdout only when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sweep output format (default csv; eval/minimize are always json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the configured relations and random batteries.
    Eval { config: PathBuf },
    /// Grid sweep over a declared parameter.
    Sweep { config: PathBuf },
    /// Random PSD-tuple fuzzing of the minor/characteristic inequalities.
    LemmaFuzz {
        /// Matrix dimension (2..=6).
        #[arg(long)]
        n: usize,
        /// Matrices per tuple (1..=3).
        #[arg(long)]
        m: usize,
        /// Number of random tuples.
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Minimize a relation margin over a state family.
    Minimize { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore failure when a pool already exists (e.g. repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let env_seed = std::env::var("URLAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok());
    let ov = Overrides {
        floor: cli.floor,
        tol_sat: cli.tol_sat,
        seed: env_seed,
    };
    let result = match &cli.cmd {
        Cmd::Eval { config } => commands::run_eval(config, &ov, cli.out.as_deref()),
        Cmd::Sweep { config } => commands::run_sweep(
            config,
            &ov,
            cli.out.as_deref(),
            matches!(cli.format, Some(Format::Json)),
        ),
        Cmd::LemmaFuzz { n, m, samples, seed } => {
            commands::run_fuzz(*n, *m, *samples, env_seed.unwrap_or(*seed), cli.out.as_deref())
        }
        Cmd::Minimize { config } => commands::run_minimize(config, &ov, cli.out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
