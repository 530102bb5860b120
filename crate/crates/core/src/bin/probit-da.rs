use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use probit_da::cli::{self, RunConfig};
use probit_da::{datasets, Error};

#[derive(Parser)]
#[command(name = "probit-da", version, about = "DA and Haar PX-DA samplers for Bayesian probit regression")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured chains and write samples, meta.json and diagnostics.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the theory report (drift constants, trace-class, propriety).
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare completed run directories.
    Compare {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        max_lag: usize,
        /// One label per run directory (defaults to the directory names).
        #[arg(long = "label")]
        labels: Vec<String>,
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
    },
    /// Write the synthetic 55-row stand-in for the lupus data.
    SynthLupus {
        #[arg(long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Args::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let line = serde_json::json!({ "error": kind.as_str(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config } => {
            let out = cli::run(&RunConfig::load(&config)?)?;
            for s in &out.samples {
                eprintln!(
                    "chain seed {}: {} draws in {:.2}s",
                    s.meta.seed,
                    s.rows(),
                    s.meta.wall_clock_secs
                );
            }
        }
        Command::Check { config } => {
            let report = cli::check(&RunConfig::load(&config)?)?;
            print!("{}", cli::theory_json(&report));
        }
        Command::Compare {
            output,
            max_lag,
            labels,
            runs,
        } => {
            cli::compare(&runs, &labels, &output, max_lag)?;
        }
        Command::SynthLupus { output } => {
            cli::write_atomic(&output, cli::data_to_csv(&datasets::synthetic_lupus()).as_bytes())?;
        }
    }
    Ok(())
}
