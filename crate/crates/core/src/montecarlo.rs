//! Monte Carlo harness: constrained random channels, per-trial estimation,
//! miss accounting and RMS error statistics against the single-tap bound.
//!
//! Distances used for matching are measured in resolution cells:
//! `τ/(T/K)` and `ν·L·T_d`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{crlb_single_tap, initial_estimate, refine, EstimateSet, EstimatorOptions, SearchRegion};
use crate::math::TWO_PI;
use crate::rng::{seeded, substream, trial_seed, SimRng};
use crate::signal::{
    apply_channel, channel_coeffs, generate_symbols, Constellation, MultipathChannel, NoiseSpec, OfdmConfig, Tap,
};

/// Maximum rejection-sampling attempts per axis.
pub const REJECTION_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub p: usize,
    /// Tap powers in dB, earliest tap first.
    pub pdp_db: Vec<f64>,
    /// Seconds.
    pub tau_range: (f64, f64),
    /// Hz.
    pub nu_range: (f64, f64),
    pub dtau_min: f64,
    pub dnu_min: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Three taps at 0/−10/−20 dB, delays on (0, 200) ns at least 200/3 ns
    /// apart, Dopplers on (−500, 500) Hz at least 1000/3 Hz apart; SNR 0 to
    /// 40 dB in 5 dB steps; 500 trials.
    pub fn three_tap() -> Self {
        Self {
            p: 3,
            pdp_db: alloc::vec![0.0, -10.0, -20.0],
            tau_range: (0.0, 200e-9),
            nu_range: (-500.0, 500.0),
            dtau_min: 200e-9 / 3.0,
            dnu_min: 1000.0 / 3.0,
            snr_grid_db: (0..=8).map(|i| 5.0 * i as f64).collect(),
            trials: 500,
            seed: 0,
        }
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::config("scenario needs at least one tap"));
        }
        if self.pdp_db.len() != self.p {
            return Err(Error::config("power delay profile length must equal P"));
        }
        if self.pdp_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("power delay profile must be finite"));
        }
        let (t0, t1) = self.tau_range;
        let (v0, v1) = self.nu_range;
        if !(t0 < t1) || !(v0 < v1) || t0 < 0.0 || !t1.is_finite() || !v0.is_finite() || !v1.is_finite() {
            return Err(Error::config(
                "scenario ranges must satisfy min < max with non-negative delays",
            ));
        }
        let slack = 1.0 + 1e-12;
        if !(self.dtau_min >= 0.0) || self.dtau_min > (t1 - t0) / self.p as f64 * slack {
            return Err(Error::config("dtau_min must lie in [0, (tau_max - tau_min)/P]"));
        }
        if !(self.dnu_min >= 0.0) || self.dnu_min > (v1 - v0) / self.p as f64 * slack {
            return Err(Error::config("dnu_min must lie in [0, (nu_max - nu_min)/P]"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("SNR grid must be a non-empty list of finite values"));
        }
        Ok(())
    }

    /// `|a_p|²` from the power delay profile.
    pub fn tap_powers(&self) -> Vec<f64> {
        self.pdp_db.iter().map(|db| 10f64.powf(db / 10.0)).collect()
    }
}

fn draw_separated(rng: &mut SimRng, n: usize, range: (f64, f64), gap: f64, axis: &'static str) -> Result<Vec<f64>> {
    let mut v = Vec::with_capacity(n);
    let mut sorted = Vec::with_capacity(n);
    for _ in 0..REJECTION_BUDGET {
        v.clear();
        v.extend((0..n).map(|_| range.0 + (range.1 - range.0) * rng.random::<f64>()));
        sorted.clear();
        sorted.extend_from_slice(&v);
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] > gap) {
            return Ok(v);
        }
    }
    Err(Error::InfeasibleSeparation {
        axis,
        draws: REJECTION_BUDGET,
    })
}

/// Random channel for one trial: delays sorted ascending, Dopplers in draw
/// order, magnitudes from the profile, phases uniform.
pub fn sample_taps(spec: &ScenarioSpec, seed: u64) -> Result<MultipathChannel> {
    spec.validate()?;
    let mut rng = seeded(seed);
    let mut taus = draw_separated(&mut rng, spec.p, spec.tau_range, spec.dtau_min, "delay")?;
    taus.sort_by(f64::total_cmp);
    let nus = draw_separated(&mut rng, spec.p, spec.nu_range, spec.dnu_min, "doppler")?;
    let taps = spec
        .tap_powers()
        .iter()
        .zip(taus.iter().zip(&nus))
        .map(|(power, (&tau, &nu))| {
            let phase = TWO_PI * rng.random::<f64>();
            Tap::new(Complex64::from_polar(power.sqrt(), phase), tau, nu)
        })
        .collect();
    MultipathChannel::new(taps)
}

/// Outcome of assigning each true tap to its nearest estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Matching {
    /// `assignment[i]` is the estimate claimed by true tap `i`; `distances`
    /// are in resolution cells.
    Matched {
        assignment: Vec<usize>,
        distances: Vec<f64>,
    },
    Miss,
}

/// Nearest-estimate assignment in normalised coordinates; a miss unless the
/// assignment is one-to-one and onto.
pub fn match_estimates(cfg: &OfdmConfig, truth: &[Tap], est: &[Tap]) -> Matching {
    if truth.len() != est.len() || truth.is_empty() {
        return Matching::Miss;
    }
    let cell_tau = cfg.delay_resolution();
    let cell_nu = cfg.doppler_resolution();
    let mut assignment = Vec::with_capacity(truth.len());
    let mut distances = Vec::with_capacity(truth.len());
    let mut claimed = alloc::vec![false; est.len()];
    for t in truth {
        let mut best = (0, f64::INFINITY);
        for (j, e) in est.iter().enumerate() {
            let d = ((e.tau - t.tau) / cell_tau).hypot((e.nu - t.nu) / cell_nu);
            if d < best.1 {
                best = (j, d);
            }
        }
        if claimed[best.0] || !best.1.is_finite() {
            return Matching::Miss;
        }
        claimed[best.0] = true;
        assignment.push(best.0);
        distances.push(best.1);
    }
    Matching::Matched { assignment, distances }
}

/// Errors of one matched estimate against its true tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapError {
    /// Seconds.
    pub tau: f64,
    /// Hz.
    pub nu: f64,
    /// `|â − a|`.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialResult {
    /// One entry per true tap.
    Matched(Vec<TapError>),
    Miss,
}

/// Everything a trial contributes to the statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub snr_index: usize,
    pub trial: usize,
    pub initial: TrialResult,
    pub refined: TrialResult,
    /// The estimator returned an error; both stages count as misses.
    pub error: bool,
}

fn score(cfg: &OfdmConfig, truth: &[Tap], est: &EstimateSet) -> TrialResult {
    match match_estimates(cfg, truth, &est.taps) {
        Matching::Miss => TrialResult::Miss,
        Matching::Matched { assignment, .. } => TrialResult::Matched(
            truth
                .iter()
                .zip(&assignment)
                .map(|(t, &j)| {
                    let e = &est.taps[j];
                    TapError {
                        tau: e.tau - t.tau,
                        nu: e.nu - t.nu,
                        gain: (e.gain - t.gain).norm(),
                    }
                })
                .collect(),
        ),
    }
}

/// Noise variance for SNR grid entry `snr_index`.
pub fn sigma2_at(cfg: &OfdmConfig, spec: &ScenarioSpec, snr_index: usize) -> Result<f64> {
    Ok(NoiseSpec::from_snr_db(cfg, spec.snr_grid_db[snr_index], 0)?.sigma2)
}

/// One trial: sample a channel, transmit all-ones symbols, estimate, match.
/// Depends only on its arguments.
pub fn run_trial(
    cfg: &OfdmConfig,
    spec: &ScenarioSpec,
    opts: &EstimatorOptions,
    region: &SearchRegion,
    snr_index: usize,
    trial: usize,
) -> Result<TrialOutcome> {
    let seed = trial_seed(spec.seed, trial as u64, snr_index as u64);
    let chan = sample_taps(spec, substream(seed, 0))?;
    let noise = NoiseSpec::from_snr_db(cfg, spec.snr_grid_db[snr_index], substream(seed, 1))?;
    let x = generate_symbols(cfg, Constellation::AllOnes, 0)?;
    let y = apply_channel(&x, &channel_coeffs(cfg, &chan), &noise)?;
    let (initial, refined, error) = match initial_estimate(cfg, &y, &x, opts, region) {
        Err(_) => (TrialResult::Miss, TrialResult::Miss, true),
        Ok(init) => {
            let first = score(cfg, chan.taps(), &init);
            match refine(cfg, &y, &x, &init, opts, region) {
                Ok(fin) => (first, score(cfg, chan.taps(), &fin), false),
                Err(_) => (first, TrialResult::Miss, true),
            }
        }
    };
    Ok(TrialOutcome {
        snr_index,
        trial,
        initial,
        refined,
        error,
    })
}

/// RMS errors for one true tap plus its bound at the scenario power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapStat {
    /// Seconds.
    pub rms_tau: f64,
    /// Hz.
    pub rms_nu: f64,
    /// RMS of `|â − a|`. Diagnostic only.
    pub rms_gain: f64,
    /// Seconds.
    pub crlb_std_tau: f64,
    /// Hz.
    pub crlb_std_nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageStats {
    pub miss_rate: f64,
    pub n_detected: usize,
    pub taps: Vec<TapStat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub sigma2: f64,
    pub trials: usize,
    /// Trials where the estimator itself failed (counted as misses).
    pub n_errors: usize,
    pub initial: StageStats,
    pub refined: StageStats,
}

/// Statistics for every SNR point. RMS values are taken over non-miss
/// trials only; `NaN` when every trial missed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub points: Vec<SnrPoint>,
}

fn stage_stats(results: &[&TrialResult], crlb: &[(f64, f64)]) -> StageStats {
    let p = crlb.len();
    let mut sums = alloc::vec![(0.0f64, 0.0f64, 0.0f64); p];
    let mut detected = 0usize;
    for r in results {
        if let TrialResult::Matched(errs) = r {
            detected += 1;
            for (s, e) in sums.iter_mut().zip(errs) {
                s.0 += e.tau * e.tau;
                s.1 += e.nu * e.nu;
                s.2 += e.gain * e.gain;
            }
        }
    }
    let n = detected as f64;
    let rms = |v: f64| if detected > 0 { (v / n).sqrt() } else { f64::NAN };
    StageStats {
        miss_rate: (results.len() - detected) as f64 / results.len().max(1) as f64,
        n_detected: detected,
        taps: sums
            .iter()
            .zip(crlb)
            .map(|(s, &(ct, cn))| TapStat {
                rms_tau: rms(s.0),
                rms_nu: rms(s.1),
                rms_gain: rms(s.2),
                crlb_std_tau: ct,
                crlb_std_nu: cn,
            })
            .collect(),
    }
}

/// Deterministic reduction: the result does not depend on the order of
/// `outcomes`.
pub fn aggregate(cfg: &OfdmConfig, spec: &ScenarioSpec, outcomes: &[TrialOutcome]) -> Result<TrialStats> {
    let mut ordered: Vec<&TrialOutcome> = outcomes.iter().collect();
    ordered.sort_by_key(|o| (o.snr_index, o.trial));
    let powers = spec.tap_powers();
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for (si, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let sigma2 = sigma2_at(cfg, spec, si)?;
        let crlb: Vec<(f64, f64)> = powers
            .iter()
            .map(|&pw| crlb_single_tap(cfg, sigma2, pw).map(|b| (b.std_tau(cfg), b.std_nu(cfg))))
            .collect::<Result<_>>()?;
        let here: Vec<&TrialOutcome> = ordered.iter().copied().filter(|o| o.snr_index == si).collect();
        let initial: Vec<&TrialResult> = here.iter().map(|o| &o.initial).collect();
        let refined: Vec<&TrialResult> = here.iter().map(|o| &o.refined).collect();
        points.push(SnrPoint {
            snr_db,
            sigma2,
            trials: here.len(),
            n_errors: here.iter().filter(|o| o.error).count(),
            initial: stage_stats(&initial, &crlb),
            refined: stage_stats(&refined, &crlb),
        });
    }
    Ok(TrialStats { points })
}

/// Every `(snr_index, trial)` pair in canonical order.
pub fn trial_indices(spec: &ScenarioSpec) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..spec.snr_grid_db.len()).flat_map(move |s| (0..spec.trials).map(move |t| (s, t)))
}

/// Runs the whole sweep sequentially.
pub fn run_trials(
    cfg: &OfdmConfig,
    spec: &ScenarioSpec,
    opts: &EstimatorOptions,
    region: &SearchRegion,
) -> Result<TrialStats> {
    spec.validate()?;
    opts.validate()?;
    region.validate()?;
    let outcomes = trial_indices(spec)
        .map(|(s, t)| run_trial(cfg, spec, opts, region, s, t))
        .collect::<Result<Vec<_>>>()?;
    aggregate(cfg, spec, &outcomes)
}
