use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ofdm_mpe::commands::{self, EstimateInput, Overrides};
use ofdm_mpe::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "ofdm-mpe", version, about = "Multipath delay/Doppler estimation for OFDM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (a directory for `montecarlo`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the command's seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            trials: self.trials,
            threads: self.threads,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample the ambiguity function on a delay/Doppler grid.
    Ambiguity(Common),
    /// Estimate taps from one received grid.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Received grid: headerless CSV, L rows of re,im pairs.
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        input: Option<PathBuf>,
        /// Build the received grid from the configured taps.
        #[arg(long)]
        synthetic: bool,
        /// Known symbols in the same format; defaults to the configured constellation.
        #[arg(long)]
        symbols: Option<PathBuf>,
    },
    /// Monte Carlo sweep over the configured SNR grid.
    Montecarlo(Common),
    /// Compare the time-domain reference chain with the grid model.
    Validate(Common),
    /// Print the single-tap bound for the scenario.
    Crlb(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ambiguity(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let (grid, path) = commands::ambiguity(&cfg, &c.overrides())?;
            println!(
                "wrote {} ({}x{} points, max |A| {:.6})",
                path.display(),
                grid.tau_axis.len(),
                grid.nu_axis.len(),
                grid.max_magnitude()
            );
        }
        Command::Estimate {
            common,
            input,
            synthetic,
            symbols,
        } => {
            let cfg = RunConfig::load(&common.config)?;
            let input = match (input, synthetic) {
                (Some(p), false) => EstimateInput::File(p),
                _ => EstimateInput::Synthetic,
            };
            let out = commands::estimate_cmd(&cfg, &input, symbols.as_deref(), &common.overrides())?;
            for t in &out.refined.taps {
                println!(
                    "tau {:10.4} ns  nu {:10.4} Hz  |a| {:8.3} dB",
                    t.tau * 1e9,
                    t.nu,
                    20.0 * t.gain.norm().log10()
                );
            }
            println!("wrote {}", out.path.display());
        }
        Command::Montecarlo(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let out = commands::montecarlo(&cfg, &c.overrides())?;
            for p in &out.stats.points {
                println!(
                    "snr {:5.1} dB  miss initial {:.3} refined {:.3}  errors {}",
                    p.snr_db, p.initial.miss_rate, p.refined.miss_rate, p.n_errors
                );
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Validate(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let report = commands::validate(&cfg)?;
            print!("{}", commands::validation_text(&report, &cfg));
        }
        Command::Crlb(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let table = commands::crlb_table(&cfg)?;
            match &c.out {
                Some(path) => ofdm_mpe::io::write_atomic(path, table.as_bytes())?,
                None => print!("{table}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
