use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eulerci_cli::commands::{self, Diagnosis, IterateOptions};
use eulerci_cli::CliError;

#[derive(Parser)]
#[command(
    name = "eulerci",
    version,
    about = "Convex integration for dissipative Euler flows on the 3-torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find (or load) the direction system and print its summary.
    Geometry {
        /// Largest shell radius λ₀ to search.
        #[arg(long, default_value_t = 12)]
        bound: u32,
        /// Load this system instead of searching.
        #[arg(long)]
        pinned: Option<PathBuf>,
        /// Write the system in text form here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the stages described by a configuration file.
    Iterate {
        config: PathBuf,
        /// Continue after the last complete stage of an existing run.
        #[arg(long)]
        resume: bool,
        /// Stop after this many stages.
        #[arg(long)]
        stop_after: Option<usize>,
        /// Output directory (overrides the configuration).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Diagnostics on snapshots and runs.
    Diagnose {
        #[command(subcommand)]
        which: Diagnose,
        /// Write PREFIX.json and PREFIX.csv instead of printing JSON.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Render SVG charts from a CSV report.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Diagnose {
    Holder {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        exponent: f64,
    },
    Energy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    Pressure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        pressure: PathBuf,
    },
    Decomposition {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        stage: usize,
    },
    Rates {
        #[arg(long)]
        run: PathBuf,
    },
}

fn emit(d: Diagnosis, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        None => print!("{}", d.json),
        Some(prefix) => {
            let name = |ext: &str| {
                let mut s = prefix.clone().into_os_string();
                s.push(ext);
                PathBuf::from(s)
            };
            std::fs::write(name(".json"), d.json)?;
            std::fs::write(name(".csv"), d.csv)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Geometry { bound, pinned, out } => {
            print!("{}", commands::geometry(bound, pinned.as_deref(), out.as_deref())?);
        }
        Command::Iterate {
            config,
            resume,
            stop_after,
            output,
        } => {
            let opts = IterateOptions {
                resume,
                stop_after,
                output,
            };
            let s = commands::iterate(&config, &opts)?;
            println!(
                "{}: {} of {} stages succeeded",
                s.directory.display(),
                s.manifest.completed,
                s.manifest.stage_budget
            );
        }
        Command::Diagnose { which, out } => {
            let d = match which {
                Diagnose::Holder { input, exponent } => commands::diagnose_holder(&input, exponent)?.1,
                Diagnose::Energy { input, profile, delta } => commands::diagnose_energy(&input, &profile, delta)?.1,
                Diagnose::Pressure { input, pressure } => commands::diagnose_pressure(&input, &pressure)?.1,
                Diagnose::Decomposition { run, stage } => commands::diagnose_decomposition(&run, stage)?.1,
                Diagnose::Rates { run } => commands::diagnose_rates(&run)?.1,
            };
            emit(d, out)?;
        }
        Command::Plot { csv, out } => commands::plot(&csv, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Infeasible { report }) => {
            print!("{report}");
            eprintln!("error: no feasible direction system");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
