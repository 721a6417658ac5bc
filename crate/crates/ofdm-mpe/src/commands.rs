//! One function per subcommand. Each returns the files it wrote.

use std::path::{Path, PathBuf};

use ofdm_mpe_core::ambiguity::{linspace, AmbiguityGrid};
use ofdm_mpe_core::estimator::{crlb_single_tap, estimate, EstimateSet};
use ofdm_mpe_core::grid::SymbolGrid;
use ofdm_mpe_core::montecarlo::{run_trials, sigma2_at, TrialStats};
use ofdm_mpe_core::signal::{apply_channel, channel_coeffs, generate_symbols, NoiseSpec};
use ofdm_mpe_core::waveform::{validate_model, ValidationReport};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io;
use crate::runner::run_parallel;

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Output file, or directory for `montecarlo`.
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
}

fn out_file(cfg: &RunConfig, ov: &Overrides, name: &str) -> PathBuf {
    ov.out.clone().unwrap_or_else(|| cfg.output_dir().join(name))
}

fn known_symbols(cfg: &RunConfig, symbols: Option<&Path>) -> Result<SymbolGrid, CliError> {
    let ofdm = cfg.ofdm_config()?;
    match symbols {
        Some(path) => io::read_grid(path, ofdm.l(), ofdm.k()),
        None => Ok(generate_symbols(&ofdm, cfg.symbols_kind()?, cfg.ofdm.symbol_seed)?),
    }
}

/// Samples the configured ambiguity form. `--seed` replaces `ofdm.symbol_seed`.
pub fn ambiguity(cfg: &RunConfig, ov: &Overrides) -> Result<(AmbiguityGrid, PathBuf), CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = ov.seed {
        cfg.ofdm.symbol_seed = seed;
    }
    let ofdm = cfg.ofdm_config()?;
    let x = known_symbols(&cfg, None)?;
    let a = &cfg.ambiguity;
    let taus = linspace(a.tau_min_ns * 1e-9, a.tau_max_ns * 1e-9, a.tau_points);
    let nus = linspace(a.nu_min_hz, a.nu_max_hz, a.nu_points);
    let grid = AmbiguityGrid::compute(&ofdm, &x, taus, nus, cfg.ambiguity_form())?;
    let path = out_file(&cfg, ov, "ambiguity.csv");
    io::write_atomic(&path, &io::ambiguity_csv(&grid)?)?;
    Ok((grid, path))
}

/// Where `estimate` takes its received grid from.
#[derive(Debug, Clone)]
pub enum EstimateInput {
    File(PathBuf),
    /// Built from `channel.taps`, with noise when `channel.snr_db` is set.
    /// `--seed` replaces `channel.noise_seed`.
    Synthetic,
}

pub struct EstimateOutput {
    pub initial: EstimateSet,
    pub refined: EstimateSet,
    pub path: PathBuf,
}

pub fn estimate_cmd(
    cfg: &RunConfig,
    input: &EstimateInput,
    symbols: Option<&Path>,
    ov: &Overrides,
) -> Result<EstimateOutput, CliError> {
    let ofdm = cfg.ofdm_config()?;
    let x = known_symbols(cfg, symbols)?;
    let y = match input {
        EstimateInput::File(path) => io::read_grid(path, ofdm.l(), ofdm.k())?,
        EstimateInput::Synthetic => {
            let chan = cfg.explicit_channel()?;
            let seed = ov.seed.unwrap_or(cfg.channel.noise_seed);
            let noise = match cfg.channel.snr_db {
                Some(db) => NoiseSpec::from_snr_db(&ofdm, db, seed)?,
                None => NoiseSpec::noiseless(),
            };
            apply_channel(&x, &channel_coeffs(&ofdm, &chan), &noise)?
        }
    };
    let opts = cfg.estimator_options()?;
    let region = cfg.region()?;
    let (initial, refined) = estimate(&ofdm, &y, &x, &opts, &region)?;
    let path = out_file(cfg, ov, "estimates.csv");
    io::write_atomic(&path, &io::estimate_csv(&initial, &refined)?)?;
    Ok(EstimateOutput { initial, refined, path })
}

pub struct MonteCarloOutput {
    pub stats: TrialStats,
    pub files: Vec<PathBuf>,
}

/// Writes `montecarlo_refined.csv`, `montecarlo_initial.csv` and
/// `montecarlo_summary.csv` into the output directory. `--seed` replaces
/// `sim.seed`, `--trials` replaces `sim.trials`. `threads = Some(1)` runs on
/// the calling thread.
pub fn montecarlo(cfg: &RunConfig, ov: &Overrides) -> Result<MonteCarloOutput, CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = ov.seed {
        cfg.sim.seed = seed;
    }
    if let Some(trials) = ov.trials {
        cfg.sim.trials = trials;
    }
    cfg.check()?;
    let ofdm = cfg.ofdm_config()?;
    let spec = cfg.scenario()?;
    let opts = cfg.estimator_options()?;
    let region = cfg.region()?;
    let stats = match ov.threads {
        _ if spec.trials == 0 => TrialStats { points: Vec::new() },
        Some(1) => run_trials(&ofdm, &spec, &opts, &region)?,
        threads => run_parallel(&ofdm, &spec, &opts, &region, threads)?,
    };
    let dir = ov.out.clone().unwrap_or_else(|| cfg.output_dir());
    let files = vec![
        (
            dir.join("montecarlo_refined.csv"),
            io::stats_csv(&stats, |p| &p.refined)?,
        ),
        (
            dir.join("montecarlo_initial.csv"),
            io::stats_csv(&stats, |p| &p.initial)?,
        ),
        (dir.join("montecarlo_summary.csv"), io::summary_csv(&stats)?),
    ];
    let mut written = Vec::new();
    for (path, bytes) in files {
        io::write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(MonteCarloOutput { stats, files: written })
}

/// Runs the three waveform comparisons and checks them against the configured
/// tolerances. Exit codes 10, 11 and 12 mark the loopback, in-prefix and
/// prefix-violation cases.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    let ofdm = cfg.ofdm_config()?;
    let x = known_symbols(cfg, None)?;
    let wcfg = cfg.waveform_config()?;
    let (in_cp, violating) = cfg.validation_taps()?;
    let report = validate_model(&ofdm, &x, &wcfg, in_cp, violating)?;
    let v = &cfg.validate;
    if report.loopback > v.loopback_tol {
        return Err(CliError::Validation {
            case: "loopback",
            value: report.loopback,
            limit: v.loopback_tol,
            code: 10,
        });
    }
    if report.in_cp.residual > v.in_cp_tol {
        return Err(CliError::Validation {
            case: "in-CP",
            value: report.in_cp.residual,
            limit: v.in_cp_tol,
            code: 11,
        });
    }
    if report.cp_violation.residual <= report.in_cp.residual {
        return Err(CliError::Validation {
            case: "CP-violation",
            value: report.cp_violation.residual,
            limit: report.in_cp.residual,
            code: 12,
        });
    }
    Ok(report)
}

pub fn validation_text(report: &ValidationReport, cfg: &RunConfig) -> String {
    format!(
        "case,residual,limit\nloopback,{},{}\nin_cp,{},{}\ncp_violation,{},>{}\n",
        io::fmt_f64(report.loopback),
        io::fmt_f64(cfg.validate.loopback_tol),
        io::fmt_f64(report.in_cp.residual),
        io::fmt_f64(cfg.validate.in_cp_tol),
        io::fmt_f64(report.cp_violation.residual),
        io::fmt_f64(report.in_cp.residual),
    )
}

/// Single-tap bound for every scenario tap at every configured SNR, as CSV.
pub fn crlb_table(cfg: &RunConfig) -> Result<String, CliError> {
    let ofdm = cfg.ofdm_config()?;
    let spec = cfg.scenario()?;
    let mut out = String::from("snr_db,tap_index,power_db,sigma2,crlb_std_tau_ns,crlb_std_nu_hz\n");
    for si in 0..spec.snr_grid_db.len() {
        let sigma2 = sigma2_at(&ofdm, &spec, si)?;
        for (i, (&db, &pw)) in spec.pdp_db.iter().zip(&spec.tap_powers()).enumerate() {
            let b = crlb_single_tap(&ofdm, sigma2, pw)?;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                io::fmt_f64(spec.snr_grid_db[si]),
                i + 1,
                io::fmt_f64(db),
                io::fmt_f64(sigma2),
                io::fmt_f64(b.std_tau(&ofdm) * 1e9),
                io::fmt_f64(b.std_nu(&ofdm)),
            ));
        }
    }
    Ok(out)
}
