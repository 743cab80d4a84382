//! `siee`: seeded experiments for sum inverse energy efficiency power
//! control. Every command writes CSV files and a manifest to `--out`.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_ranges, RunConfig};
use error::CliError;
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "siee", version, about = "Sum inverse energy efficiency experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Key-value configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterates of Dinkelbach and the fraction transform on a scalar ratio.
    DemoScalar,
    /// Solve one random instance.
    Solve {
        #[arg(long)]
        n_bs: Option<usize>,
    },
    /// Compare against sum-rate maximization on a weak-user instance.
    CompareBaseline {
        #[arg(long)]
        n_bs: Option<usize>,
        /// Grid points per axis of the baseline search.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Monte Carlo fairness comparison of SIMin and SMax picks.
    FairnessMc {
        /// Largest number of terms; every count from 2 up is run.
        #[arg(long)]
        terms: Option<usize>,
        /// Upper ends of the uniform draw, comma separated.
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Newton, residual and penalty diagnostics for 1..=n-bs users.
    AdmmDiag {
        #[arg(long)]
        n_bs: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::DemoScalar => "demo_scalar",
            Command::Solve { .. } => "solve",
            Command::CompareBaseline { .. } => "compare_baseline",
            Command::FairnessMc { .. } => "fairness_mc",
            Command::AdmmDiag { .. } => "admm_diag",
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.common.seed {
        cfg.scenario.seed = seed;
        cfg.solver.seed = seed;
    }
    match &cli.command {
        Command::DemoScalar => {}
        Command::Solve { n_bs } | Command::AdmmDiag { n_bs } => {
            if let Some(n) = n_bs {
                cfg.scenario.n_bs = *n;
            }
        }
        Command::CompareBaseline { n_bs, resolution } => {
            if let Some(n) = n_bs {
                cfg.scenario.n_bs = *n;
            }
            if let Some(r) = resolution {
                cfg.resolution = *r;
            }
        }
        Command::FairnessMc { terms, range, trials } => {
            if let Some(t) = terms {
                cfg.terms = *t;
            }
            if let Some(r) = range {
                cfg.ranges = parse_ranges("range", r)?;
            }
            if let Some(t) = trials {
                cfg.trials = *t;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    let mut out = Output::new(&cli.common.out)?;
    match cli.command {
        Command::DemoScalar => commands::demo_scalar(&mut out)?,
        Command::Solve { .. } => commands::solve(&cfg, &mut out)?,
        Command::CompareBaseline { .. } => commands::compare_baseline(&cfg, &mut out)?,
        Command::FairnessMc { .. } => commands::fairness_mc(&cfg, &mut out)?,
        Command::AdmmDiag { .. } => commands::admm_diag(&cfg, &mut out)?,
    }
    out.manifest(cli.command.name(), &cfg)?;
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
