use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;
mod output;

#[derive(Parser)]
#[command(name = "prefbo", about = "Preference-based multi-objective Bayesian optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one optimisation run and write trace.csv + meta.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the run seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the method: mono | multi-gumbel | multi-laplace.
        #[arg(long)]
        method: Option<String>,
        /// Output directory (default from the config file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker thread cap.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run mono and multi methods over the 25-point reference grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Aggregate a sweep directory into summary.csv and final_points.csv.
    Report {
        /// Sweep output directory.
        sweep_dir: PathBuf,
    },
    /// Print the front point nearest the configured reference point.
    Refsol {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, method, out, jobs } => {
            commands::run(&config, seed, method.as_deref(), out, jobs)
        }
        Command::Sweep { config, seed, out, jobs } => {
            commands::sweep(&config, seed, out, jobs)
        }
        Command::Report { sweep_dir } => commands::report(&sweep_dir),
        Command::Refsol { config } => commands::refsol(&config),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
