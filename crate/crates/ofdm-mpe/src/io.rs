//! CSV serialisation, atomic file output and grid input.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use ofdm_mpe_core::ambiguity::AmbiguityGrid;
use ofdm_mpe_core::estimator::EstimateSet;
use ofdm_mpe_core::grid::SymbolGrid;
use ofdm_mpe_core::montecarlo::{StageStats, TrialStats};
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Twelve significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    let mut tmp = NamedTempFile::new_in(parent).map_err(|e| io_err(parent, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub const AMBIGUITY_HEADER: [&str; 5] = ["tau_sec", "nu_hz", "re", "im", "abs"];

pub fn ambiguity_csv(grid: &AmbiguityGrid) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &AMBIGUITY_HEADER,
        grid.iter().map(|(tau, nu, a)| {
            vec![
                fmt_f64(tau),
                fmt_f64(nu),
                fmt_f64(a.re),
                fmt_f64(a.im),
                fmt_f64(a.norm()),
            ]
        }),
    )
}

pub const ESTIMATE_HEADER: [&str; 7] = ["p", "re_a", "im_a", "abs_a_db", "tau_ns", "nu_hz", "stage"];

pub fn estimate_csv(initial: &EstimateSet, refined: &EstimateSet) -> Result<Vec<u8>, CliError> {
    let rows = [("initial", initial), ("refined", refined)]
        .into_iter()
        .flat_map(|(stage, set)| {
            set.taps.iter().enumerate().map(move |(i, t)| {
                vec![
                    (i + 1).to_string(),
                    fmt_f64(t.gain.re),
                    fmt_f64(t.gain.im),
                    fmt_f64(20.0 * t.gain.norm().log10()),
                    fmt_f64(t.tau * 1e9),
                    fmt_f64(t.nu),
                    stage.to_string(),
                ]
            })
        })
        .collect::<Vec<_>>();
    csv_bytes(&ESTIMATE_HEADER, rows)
}

pub const STATS_HEADER: [&str; 9] = [
    "snr_db",
    "tap_index",
    "rms_tau_ns",
    "rms_nu_hz",
    "rms_gain",
    "crlb_std_tau_ns",
    "crlb_std_nu_hz",
    "miss_rate",
    "n_detected",
];

/// One row per (SNR point, true tap) for the chosen stage.
pub fn stats_csv(
    stats: &TrialStats,
    stage: impl Fn(&ofdm_mpe_core::montecarlo::SnrPoint) -> &StageStats,
) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for point in &stats.points {
        let s = stage(point);
        for (i, t) in s.taps.iter().enumerate() {
            rows.push(vec![
                fmt_f64(point.snr_db),
                (i + 1).to_string(),
                fmt_f64(t.rms_tau * 1e9),
                fmt_f64(t.rms_nu),
                fmt_f64(t.rms_gain),
                fmt_f64(t.crlb_std_tau * 1e9),
                fmt_f64(t.crlb_std_nu),
                fmt_f64(s.miss_rate),
                s.n_detected.to_string(),
            ]);
        }
    }
    csv_bytes(&STATS_HEADER, rows)
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "snr_db",
    "tap_index",
    "trials",
    "n_errors",
    "initial_tau_ratio",
    "initial_nu_ratio",
    "refined_tau_ratio",
    "refined_nu_ratio",
    "refined_miss_rate",
];

/// RMS over bound for both stages.
pub fn summary_csv(stats: &TrialStats) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for point in &stats.points {
        for (i, (a, b)) in point.initial.taps.iter().zip(&point.refined.taps).enumerate() {
            rows.push(vec![
                fmt_f64(point.snr_db),
                (i + 1).to_string(),
                point.trials.to_string(),
                point.n_errors.to_string(),
                fmt_f64(a.rms_tau / a.crlb_std_tau),
                fmt_f64(a.rms_nu / a.crlb_std_nu),
                fmt_f64(b.rms_tau / b.crlb_std_tau),
                fmt_f64(b.rms_nu / b.crlb_std_nu),
                fmt_f64(point.refined.miss_rate),
            ]);
        }
    }
    csv_bytes(&SUMMARY_HEADER, rows)
}

/// Headerless CSV, one row per symbol, `re,im` per subcarrier.
pub fn grid_csv(grid: &SymbolGrid) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for l in 0..grid.rows() {
        let row: Vec<String> = (0..grid.cols())
            .flat_map(|k| {
                let v = grid[(l, k)];
                [fmt_f64(v.re), fmt_f64(v.im)]
            })
            .collect();
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Parses a grid written by [`grid_csv`], requiring `l` rows of `2k` values.
pub fn parse_grid(text: &str, l: usize, k: usize) -> Result<SymbolGrid, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut grid = SymbolGrid::zeros(l, k);
    let mut rows = 0;
    for (li, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(e.to_string()))?;
        if rec.len() != 2 * k {
            return Err(CliError::Input(format!(
                "row {}: expected {} columns, found {}",
                li + 1,
                2 * k,
                rec.len()
            )));
        }
        if li >= l {
            return Err(CliError::Input(format!("expected {l} rows, found more")));
        }
        for kk in 0..k {
            let num = |j: usize| {
                rec[j]
                    .parse::<f64>()
                    .map_err(|e| CliError::Input(format!("row {}, column {}: {e}", li + 1, j + 1)))
            };
            grid[(li, kk)] = Complex64::new(num(2 * kk)?, num(2 * kk + 1)?);
        }
        rows += 1;
    }
    if rows != l {
        return Err(CliError::Input(format!("expected {l} rows, found {rows}")));
    }
    Ok(grid)
}

pub fn read_grid(path: &Path, l: usize, k: usize) -> Result<SymbolGrid, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_grid(&text, l, k)
}
