//! Parallel Monte Carlo driver. Trials are independent and seeded by index,
//! so the reduction after collection matches the serial core runner exactly.

use ofdm_mpe_core::estimator::{EstimatorOptions, SearchRegion};
use ofdm_mpe_core::montecarlo::{aggregate, run_trial, trial_indices, ScenarioSpec, TrialOutcome, TrialStats};
use ofdm_mpe_core::signal::OfdmConfig;
use rayon::prelude::*;

use crate::error::CliError;

/// Runs the sweep on `threads` workers (rayon's default when `None`).
pub fn run_parallel(
    cfg: &OfdmConfig,
    spec: &ScenarioSpec,
    opts: &EstimatorOptions,
    region: &SearchRegion,
    threads: Option<usize>,
) -> Result<TrialStats, CliError> {
    if spec.trials == 0 {
        return Ok(TrialStats { points: Vec::new() });
    }
    spec.validate()?;
    opts.validate()?;
    region.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let jobs: Vec<(usize, usize)> = trial_indices(spec).collect();
    let outcomes = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, t)| run_trial(cfg, spec, opts, region, s, t))
            .collect::<Result<Vec<TrialOutcome>, _>>()
    })?;
    Ok(aggregate(cfg, spec, &outcomes)?)
}
