use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermogas_cli::{execute, Invocation, Task};

#[derive(Parser)]
#[command(
    name = "thermogas",
    version,
    about = "Simulate and verify the non-isothermal ideal gas model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed of random initial data and corpora.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the initial data and write the norm series and snapshots.
    Simulate(Common),
    /// Picard iteration for the a-form system.
    Fixedpoint(Common),
    /// Per-block Besov report of the initial data.
    Besov(Common),
    /// Parabolic scaling two-run comparison.
    Scaling(Common),
    /// Run the acceptance suite.
    Verify(Common),
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("THERMOGAS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            format!(
                "config error at `THERMOGAS_THREADS`: expected a positive integer, got {value:?}"
            )
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    let (task, common) = match cli.command {
        Command::Simulate(c) => (Task::Simulate, c),
        Command::Fixedpoint(c) => (Task::Fixedpoint, c),
        Command::Besov(c) => (Task::Besov, c),
        Command::Scaling(c) => (Task::Scaling, c),
        Command::Verify(c) => (Task::Verify, c),
    };
    let inv = Invocation {
        task,
        config: common.config,
        out: common.out,
        seed: common.seed,
    };
    match execute(&inv) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
