use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use app_optim::harness::{emit_outputs, parse_config, run_experiment, SeriesFit};
use app_optim::Error;

/// Stochastic APP experiment driver.
#[derive(Parser)]
#[command(name = "app-optim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and write gaps.csv, fit.csv, config.ini and plotdata.dat.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's [output] dir, else ./out)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of replications
        #[arg(long)]
        reps: Option<usize>,
        /// Seed of replication 0
        #[arg(long)]
        seed: Option<u64>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 1;

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Config(_) | Error::InvalidArgument(_) | Error::IndefiniteCoupling { .. } | Error::BlockMismatch(_) | Error::DimensionMismatch { .. } => {
            EXIT_CONFIG
        }
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_NUMERIC,
    }
}

fn describe(name: &str, fit: &SeriesFit) -> String {
    match fit {
        Ok(f) => format!("{name}: slope {:.4} (r2 {:.4}, n in [{}, {}])", f.slope, f.r2, f.window.0.round(), f.window.1.round()),
        Err(e) => format!("{name}: no fit ({e})"),
    }
}

fn main() -> ExitCode {
    let Command::Run { config, out, reps, seed } = Cli::parse().command;

    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error in {}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(r) = reps {
        if r == 0 {
            eprintln!("config error: --reps must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        cfg.replications = r;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(dir) = out {
        cfg.out_dir = Some(dir);
    }
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));

    let outcome = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = emit_outputs(&outcome, &cfg, &dir) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    println!("wrote {} checkpoints x {} replications to {}", outcome.table.rows.len(), cfg.replications, dir.display());
    println!("{}", describe("averaged", &outcome.fits.averaged));
    println!("{}", describe("last", &outcome.fits.last));
    if let Some((r, msg)) = &outcome.failure {
        eprintln!("error: replication {r} failed: {msg}");
        return ExitCode::from(EXIT_NUMERIC);
    }
    ExitCode::SUCCESS
}
