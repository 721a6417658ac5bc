//! Oversampled time-domain reference for the frequency-domain model.
//!
//! The transmitter synthesises the continuous-time OFDM packet on a sample
//! grid of spacing `dt = T/(K·oversample)`, samples taken at the midpoints
//! `(n + ½)·dt`. The channel applies per-tap delay (nearest sample),
//! Doppler rotation and gain. The receiver discards the cyclic prefix and
//! correlates against each subcarrier with the midpoint rule. Filters are
//! ideal over the signal band.
//!
//! The matched-filter output is normalised by `KL·T_d/T` so that a noiseless
//! loopback returns `X`; the residual scale `Â_w(τ,ν)/Â_w(0,0)` that remains
//! per tap is what the frequency-domain model folds into the tap gain.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::math::{cis_cycles, sinc};
use crate::rng::seeded;
use crate::signal::{coeffs_from_taps, MultipathChannel, NoiseSpec, OfdmConfig, Tap};

use core::f64::consts::PI;

/// Upper bound on the number of samples in a synthesised packet.
pub const SAMPLE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// `w̃(t) = 1/√T_d` on `[0, T_d]`.
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filter {
    /// Flat, ripple-free pass band wider than the signal.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveformConfig {
    /// Samples per `T/K` interval.
    pub oversample: usize,
    pub window: Window,
    pub filter: Filter,
}

impl WaveformConfig {
    pub fn new(oversample: usize) -> Result<Self> {
        if oversample < 4 {
            return Err(Error::config("oversample must be at least 4"));
        }
        Ok(Self {
            oversample,
            window: Window::Rectangular,
            filter: Filter::Ideal,
        })
    }
}

/// A sampled complex baseband waveform; sample `n` is taken at `(n + ½)·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl Waveform {
    pub fn time(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.dt
    }

    /// `∫|x|² dt` by the midpoint rule.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    dt: f64,
    per_symbol: usize,
    prefix: usize,
    total: usize,
}

fn layout(cfg: &OfdmConfig, wcfg: &WaveformConfig) -> Result<Layout> {
    if wcfg.oversample < 4 {
        return Err(Error::config("oversample must be at least 4"));
    }
    let per_t = cfg.k() * wcfg.oversample;
    let dt = cfg.t() / per_t as f64;
    let per_symbol_f = cfg.t_d() / dt;
    let prefix_f = cfg.t_cp() / dt;
    let per_symbol = per_symbol_f.round();
    let prefix = prefix_f.round();
    if (per_symbol_f - per_symbol).abs() > 1e-6 || (prefix_f - prefix).abs() > 1e-6 {
        return Err(Error::config(
            "cyclic prefix is not an integer number of samples at this oversampling",
        ));
    }
    let per_symbol = per_symbol as usize;
    let total = per_symbol.saturating_mul(cfg.l());
    if total > SAMPLE_LIMIT {
        return Err(Error::SampleBudget {
            samples: total,
            limit: SAMPLE_LIMIT,
        });
    }
    Ok(Layout {
        dt,
        per_symbol,
        prefix: prefix as usize,
        total,
    })
}

/// Transmit waveform
/// `x(t) = (1/√KL) Σ_{l,k} X_{l,k} e^{j2π(k−1−⌊K/2⌋)(t−T_cp)/T} w(t − (l−1)T_d)`.
pub fn synth_tx(cfg: &OfdmConfig, x: &SymbolGrid, wcfg: &WaveformConfig) -> Result<Waveform> {
    cfg.check_grid(x)?;
    let lay = layout(cfg, wcfg)?;
    let amp = 1.0 / (cfg.kl() * cfg.t_d()).sqrt();
    let mut samples = Vec::with_capacity(lay.total);
    for n in 0..lay.total {
        let l = n / lay.per_symbol;
        let t = (n as f64 + 0.5) * lay.dt;
        let rel = (t - cfg.t_cp()) / cfg.t();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..cfg.k() {
            let v = x[(l, k)];
            if v.norm_sqr() > 0.0 {
                acc += v * cis_cycles(cfg.offset(k) * rel);
            }
        }
        samples.push(acc * amp);
    }
    Ok(Waveform { dt: lay.dt, samples })
}

/// Received waveform `Σ_p a_p e^{−j2πν_p t} x(t − τ_p)`; delays are rounded
/// to the nearest sample.
pub fn apply_ct_channel(wave: &Waveform, chan: &MultipathChannel, _wcfg: &WaveformConfig) -> Result<Waveform> {
    let n_total = wave.samples.len();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n_total];
    for tap in chan.taps() {
        let shift = (tap.tau / wave.dt).round();
        if shift >= n_total as f64 {
            return Err(Error::SampleBudget {
                samples: shift as usize,
                limit: n_total,
            });
        }
        let shift = shift as usize;
        for (n, (o, s)) in out[shift..].iter_mut().zip(&wave.samples).enumerate() {
            *o += tap.gain * cis_cycles(-tap.nu * wave.time(n + shift)) * s;
        }
    }
    Ok(Waveform {
        dt: wave.dt,
        samples: out,
    })
}

/// Adds white Gaussian noise scaled so that, after [`matched_filter`], each
/// grid entry carries noise of variance `noise.sigma2`.
pub fn add_noise(wave: &Waveform, cfg: &OfdmConfig, noise: &NoiseSpec) -> Waveform {
    let mut out = wave.clone();
    if noise.sigma2 > 0.0 {
        let var = noise.sigma2 * cfg.t() / (cfg.kl() * cfg.t_d() * wave.dt);
        let std = (var / 2.0).sqrt();
        let mut rng = seeded(noise.seed);
        for s in &mut out.samples {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *s += Complex64::new(re * std, im * std);
        }
    }
    out
}

/// Receiver: drop the prefix and correlate each symbol with each subcarrier,
/// `Y_{l,k} ∝ ∫_{T_cp+(l−1)T_d}^{lT_d} y(t) w*(t−(l−1)T_d) e^{−j2π(k−1−⌊K/2⌋)(t−T_cp)/T} dt`.
pub fn matched_filter(wave: &Waveform, cfg: &OfdmConfig, wcfg: &WaveformConfig) -> Result<SymbolGrid> {
    let lay = layout(cfg, wcfg)?;
    if wave.samples.len() != lay.total || (wave.dt - lay.dt).abs() > 1e-12 * lay.dt {
        return Err(Error::config("waveform does not match the OFDM configuration"));
    }
    // (1/√KL)·(1/√T_d)·dt, then the KL·T_d/T normalisation
    let scale = (cfg.kl() * cfg.t_d()).sqrt() / cfg.t() * lay.dt;
    let mut y = SymbolGrid::zeros(cfg.l(), cfg.k());
    for l in 0..cfg.l() {
        let start = l * lay.per_symbol + lay.prefix;
        let end = (l + 1) * lay.per_symbol;
        for k in 0..cfg.k() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in start..end {
                let rel = (wave.time(n) - cfg.t_cp()) / cfg.t();
                acc += wave.samples[n] * cis_cycles(-cfg.offset(k) * rel);
            }
            y[(l, k)] = acc * scale;
        }
    }
    Ok(y)
}

/// `∫_a^b e^{−j2πνt} dt`, stable as `ν → 0`.
fn exp_integral(a: f64, b: f64, nu: f64) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let len = b - a;
    Complex64::cis(-PI * nu * (a + b)) * (len * sinc(PI * nu * len))
}

/// `Â_w(τ, ν) = ∫_{T_cp}^{T_d} w(t−τ) w*(t) e^{−j2πνt} dt` for the
/// rectangular window. `Â_w(0, 0) = T/T_d`.
pub fn window_ambiguity(wcfg: &WaveformConfig, cfg: &OfdmConfig, tau: f64, nu: f64) -> Complex64 {
    match wcfg.window {
        Window::Rectangular => {
            let a = cfg.t_cp().max(tau);
            let b = cfg.t_d().min(cfg.t_d() + tau);
            exp_integral(a, b, nu) / cfg.t_d()
        }
    }
}

/// Full ambiguity function of the rectangular window,
/// `A_w(τ, ν) = ∫ w(t) w*(t−τ) e^{−j2πνt} dt`.
pub fn rect_window_autoambiguity(cfg: &OfdmConfig, tau: f64, nu: f64) -> Complex64 {
    let a = tau.max(0.0);
    let b = cfg.t_d().min(cfg.t_d() + tau);
    exp_integral(a, b, nu) / cfg.t_d()
}

/// How well a matched-filter output agrees with `H ⊙ X` for one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFit {
    /// `‖Y − c·(H⊙X)‖ / ‖H⊙X‖` with `c` the least-squares complex scale.
    pub residual: f64,
    /// `‖Y − H⊙X‖ / ‖H⊙X‖`.
    pub raw_residual: f64,
    pub scale: Complex64,
    /// `Â_w(τ,ν)/Â_w(0,0)` for the (first) tap.
    pub predicted_scale: Complex64,
}

/// Runs `x` through the time-domain chain for `taps` (noiseless) and compares
/// the matched-filter output with the frequency-domain model.
pub fn fit_model(cfg: &OfdmConfig, x: &SymbolGrid, wcfg: &WaveformConfig, taps: &[Tap]) -> Result<ModelFit> {
    let chan = MultipathChannel::new(taps.to_vec())?;
    let tx = synth_tx(cfg, x, wcfg)?;
    let rx = apply_ct_channel(&tx, &chan, wcfg)?;
    let y = matched_filter(&rx, cfg, wcfg)?;
    let hx = coeffs_from_taps(cfg, taps).hadamard(x)?;
    let energy = hx.energy();
    if energy == 0.0 {
        return Err(Error::config("model grid has zero energy"));
    }
    let proj: Complex64 = hx.as_slice().iter().zip(y.as_slice()).map(|(h, v)| h.conj() * v).sum();
    let scale = proj / energy;
    let mut fitted = 0.0;
    let mut raw = 0.0;
    for (h, v) in hx.as_slice().iter().zip(y.as_slice()) {
        fitted += (v - h * scale).norm_sqr();
        raw += (v - h).norm_sqr();
    }
    let first = taps[0];
    let predicted_scale = window_ambiguity(wcfg, cfg, first.tau, first.nu) / window_ambiguity(wcfg, cfg, 0.0, 0.0);
    Ok(ModelFit {
        residual: (fitted / energy).sqrt(),
        raw_residual: (raw / energy).sqrt(),
        scale,
        predicted_scale,
    })
}

/// Loopback, in-prefix and prefix-violating comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    /// `‖Y − X‖/‖X‖` with no channel and no noise.
    pub loopback: f64,
    pub in_cp: ModelFit,
    pub cp_violation: ModelFit,
}

/// Runs the three reference comparisons. `in_cp` must have its delay inside
/// the cyclic prefix and `violating` beyond it.
pub fn validate_model(
    cfg: &OfdmConfig,
    x: &SymbolGrid,
    wcfg: &WaveformConfig,
    in_cp: Tap,
    violating: Tap,
) -> Result<ValidationReport> {
    if in_cp.tau >= cfg.t_cp() {
        return Err(Error::config("in-CP case needs a delay shorter than the cyclic prefix"));
    }
    if violating.tau <= cfg.t_cp() {
        return Err(Error::config(
            "CP-violation case needs a delay longer than the cyclic prefix",
        ));
    }
    let tx = synth_tx(cfg, x, wcfg)?;
    let y = matched_filter(&tx, cfg, wcfg)?;
    let loopback = (y.sub(x)?.energy() / x.energy()).sqrt();
    Ok(ValidationReport {
        loopback,
        in_cp: fit_model(cfg, x, wcfg, &[in_cp])?,
        cp_violation: fit_model(cfg, x, wcfg, &[violating])?,
    })
}
