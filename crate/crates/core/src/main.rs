use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uwbsync::cli::{self, Overrides};
use uwbsync::scenario;

#[derive(Parser)]
#[command(name = "uwbsync", version, about = "Two-stage UWB TH-PAM timing acquisition simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write metrics.csv plus a manifest.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated SNR points in dB (`noiseless` allowed).
        #[arg(long)]
        snr: Option<String>,
        /// coarse_only, two_stage or both.
        #[arg(long)]
        estimator: Option<String>,
        /// nda, da or both.
        #[arg(long)]
        mode: Option<String>,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in oracle checks.
    Selftest,
    /// Print the canonical form of a scenario (a path, or `paper_cm1` / `desk`).
    EmitConfig { source: String },
}

fn parse_snr_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| match x {
            "noiseless" | "inf" => Ok(f64::INFINITY),
            _ => x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(format!("bad SNR `{x}`")),
        })
        .collect()
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    let code = match args.command {
        Command::Run { scenario: path, out, seed, trials, snr, estimator, mode, workers } => {
            let overrides = (|| -> Result<Overrides, String> {
                Ok(Overrides {
                    seed,
                    trials,
                    snr_db: snr.as_deref().map(parse_snr_list).transpose()?,
                    estimators: estimator.as_deref().map(scenario::parse_estimators).transpose()?,
                    modes: mode.as_deref().map(scenario::parse_modes).transpose()?,
                    workers,
                })
            })();
            match overrides {
                Ok(o) => cli::cmd_run(&path, &out, &o, &mut stderr),
                Err(e) => {
                    eprintln!("uwbsync: config error: {e}");
                    cli::EXIT_CONFIG
                }
            }
        }
        Command::Selftest => cli::cmd_selftest(&mut stdout),
        Command::EmitConfig { source } => cli::cmd_emit_config(&source, &mut stdout, &mut stderr),
    };
    ExitCode::from(code as u8)
}
