use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inlslab_cli::{init_threads, parse_config_in, run, CliError, Mode};

#[derive(Parser)]
#[command(name = "inlslab", version, about = "Ground states, thresholds and evolution for the inhomogeneous NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state and write profile.csv and report.json
    Groundstate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare initial data with the ground-state thresholds
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evolve initial data and write trajectory.csv and report.json
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the self-check suites and write verify.json
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify a list of (N, sigma, b, gamma) cases
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<inlslab_cli::RunSummary, CliError> {
    init_threads()?;
    let (mode, path, seed) = match cli.command {
        Command::Groundstate { config } => (Mode::Groundstate, config, None),
        Command::Classify { config } => (Mode::Classify, config, None),
        Command::Evolve { config } => (Mode::Evolve, config, None),
        Command::Verify { config, seed } => (Mode::Verify, config, seed),
        Command::Sweep { config } => (Mode::Sweep, config, None),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut cfg = parse_config_in(&text, base, Some(mode))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    run(&cfg)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(summary) => {
            if let Some(table) = &summary.table {
                print!("{table}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
