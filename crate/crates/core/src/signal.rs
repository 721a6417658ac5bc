//! OFDM system/channel description and the frequency-domain observation
//! model `Y = H ⊙ X + Z`.
//!
//! Subcarrier and symbol indices in this module's public API follow the
//! 1-based convention `l = 1..L`, `k = 1..K`; subcarrier `k` sits at the
//! baseband offset `k − 1 − ⌊K/2⌋` (in units of `1/T`).

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::math::cis_cycles;
use crate::rng::seeded;

/// Static OFDM system parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    k: usize,
    l: usize,
    t: f64,
    t_d: f64,
    t_cp: f64,
    null_set: Vec<usize>,
}

impl OfdmConfig {
    /// `k` subcarriers, `l` symbols, inverse subcarrier spacing `t` and cyclic
    /// prefix `t_cp` (seconds); `t_d = t + t_cp`. `null_set` holds 1-based
    /// subcarrier indices.
    pub fn new(k: usize, l: usize, t: f64, t_cp: f64, null_set: &[usize]) -> Result<Self> {
        Self::with_symbol_duration(k, l, t, t + t_cp, t_cp, null_set)
    }

    /// Like [`OfdmConfig::new`] but with an explicit symbol duration, which
    /// must equal `t + t_cp` to 1e-12 relative.
    pub fn with_symbol_duration(k: usize, l: usize, t: f64, t_d: f64, t_cp: f64, null_set: &[usize]) -> Result<Self> {
        if k < 2 || l < 2 {
            return Err(Error::config(format!("need K >= 2 and L >= 2, got K={k}, L={l}")));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::config("T must be positive"));
        }
        if !(t_cp.is_finite() && t_cp >= 0.0) {
            return Err(Error::config("T_cp must be non-negative"));
        }
        if !t_d.is_finite() || (t_d - (t + t_cp)).abs() > 1e-12 * t_d.abs().max(t) {
            return Err(Error::config(format!("T_d={t_d} does not equal T + T_cp={}", t + t_cp)));
        }
        let mut nulls = null_set.to_vec();
        nulls.sort_unstable();
        for w in nulls.windows(2) {
            if w[0] == w[1] {
                return Err(Error::config(format!("duplicate null subcarrier {}", w[0])));
            }
        }
        if let Some(&bad) = nulls.iter().find(|&&n| n == 0 || n > k) {
            return Err(Error::config(format!("null subcarrier {bad} outside 1..={k}")));
        }
        if nulls.len() == k {
            return Err(Error::config("every subcarrier is null"));
        }
        Ok(Self {
            k,
            l,
            t,
            t_d,
            t_cp,
            null_set: nulls,
        })
    }

    /// 802.11a/p-like numerology: `K = 52` with the DC subcarrier
    /// `k = ⌊K/2⌋ + 1` nulled, `T = 6.4 µs`, `T_d = 8 µs`.
    ///
    /// The standard's 53-bin description (52 data/pilot bins plus DC) is
    /// represented here as 52 bins with the DC bin among them; use
    /// [`OfdmConfig::new`] for other layouts.
    pub fn ieee80211(l: usize) -> Result<Self> {
        Self::new(52, l, 6.4e-6, 1.6e-6, &[52 / 2 + 1])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Inverse subcarrier spacing (s).
    pub fn t(&self) -> f64 {
        self.t
    }

    /// OFDM symbol duration (s).
    pub fn t_d(&self) -> f64 {
        self.t_d
    }

    /// Cyclic prefix duration (s).
    pub fn t_cp(&self) -> f64 {
        self.t_cp
    }

    /// Sorted 1-based null subcarrier indices.
    pub fn null_set(&self) -> &[usize] {
        &self.null_set
    }

    pub fn active_subcarriers(&self) -> usize {
        self.k - self.null_set.len()
    }

    /// Whether 1-based subcarrier `k` is null.
    pub fn is_null(&self, k: usize) -> bool {
        self.null_set.binary_search(&k).is_ok()
    }

    /// Baseband offset `k − 1 − ⌊K/2⌋` of the 0-based subcarrier `idx`.
    #[inline]
    pub fn offset(&self, idx: usize) -> f64 {
        idx as f64 - (self.k / 2) as f64
    }

    /// `K·L`.
    pub fn kl(&self) -> f64 {
        (self.k * self.l) as f64
    }

    /// Delay main-lobe half width, `T/K`.
    pub fn delay_resolution(&self) -> f64 {
        self.t / self.k as f64
    }

    /// Doppler main-lobe half width, `1/(L·T_d)`.
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.l as f64 * self.t_d)
    }

    pub(crate) fn check_grid(&self, g: &SymbolGrid) -> Result<()> {
        if g.rows() != self.l || g.cols() != self.k {
            return Err(Error::DimensionMismatch {
                expected_rows: self.l,
                expected_cols: self.k,
                rows: g.rows(),
                cols: g.cols(),
            });
        }
        Ok(())
    }
}

/// One multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Complex gain.
    pub gain: Complex64,
    /// Delay (s).
    pub tau: f64,
    /// Doppler offset (Hz).
    pub nu: f64,
}

impl Tap {
    pub fn new(gain: Complex64, tau: f64, nu: f64) -> Self {
        Self { gain, tau, nu }
    }
}

/// Where a channel falls outside the regime in which the frequency-domain
/// model is accurate. Not an error: the estimator still runs, the extra
/// ISI/ICI acts as additional noise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelWarnings {
    pub delay_exceeds_cp: bool,
    pub doppler_exceeds_spacing: bool,
}

impl ModelWarnings {
    pub fn any(&self) -> bool {
        self.delay_exceeds_cp || self.doppler_exceeds_spacing
    }
}

/// The `P` taps to be estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    taps: Vec<Tap>,
}

impl MultipathChannel {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::config("a channel needs at least one tap"));
        }
        for (i, t) in taps.iter().enumerate() {
            if !(t.tau.is_finite() && t.tau >= 0.0) {
                return Err(Error::config(format!("tap {} has invalid delay {}", i + 1, t.tau)));
            }
            if !t.nu.is_finite() || !t.gain.re.is_finite() || !t.gain.im.is_finite() {
                return Err(Error::config(format!("tap {} has non-finite parameters", i + 1)));
            }
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn warnings(&self, cfg: &OfdmConfig) -> ModelWarnings {
        ModelWarnings {
            delay_exceeds_cp: self.taps.iter().any(|t| t.tau >= cfg.t_cp()),
            doppler_exceeds_spacing: self.taps.iter().any(|t| t.nu.abs() >= 1.0 / cfg.t()),
        }
    }
}

/// Transmit symbol alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    /// Every active entry is `1`.
    AllOnes,
    /// Uniform `M`-PSK, points `e^{j2πm/M}`.
    Psk(u32),
}

/// Additive noise description. `sigma2` is the per-entry complex variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
    /// Linear SNR; infinite when noiseless.
    pub snr: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            sigma2: 0.0,
            snr: f64::INFINITY,
            seed: 0,
        }
    }

    /// `σ² = (K − |𝒦|)/snr`.
    pub fn from_snr(cfg: &OfdmConfig, snr: f64, seed: u64) -> Result<Self> {
        if snr.is_nan() || snr <= 0.0 {
            return Err(Error::config("SNR must be positive"));
        }
        Ok(Self {
            sigma2: cfg.active_subcarriers() as f64 / snr,
            snr,
            seed,
        })
    }

    pub fn from_snr_db(cfg: &OfdmConfig, snr_db: f64, seed: u64) -> Result<Self> {
        Self::from_snr(cfg, 10f64.powf(snr_db / 10.0), seed)
    }
}

pub fn generate_symbols(cfg: &OfdmConfig, constellation: Constellation, seed: u64) -> Result<SymbolGrid> {
    let zero = Complex64::new(0.0, 0.0);
    let active: Vec<bool> = (1..=cfg.k()).map(|k| !cfg.is_null(k)).collect();
    match constellation {
        Constellation::AllOnes => Ok(SymbolGrid::from_fn(cfg.l(), cfg.k(), |_, k| {
            if active[k] {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        })),
        Constellation::Psk(order) => {
            if order < 2 {
                return Err(Error::config(format!("PSK order must be >= 2, got {order}")));
            }
            let points: Vec<Complex64> = (0..order)
                .map(|m| {
                    // exact points on the axes, so QPSK is exactly {±1, ±j}
                    if (4 * m) % order == 0 {
                        [
                            Complex64::new(1.0, 0.0),
                            Complex64::new(0.0, 1.0),
                            Complex64::new(-1.0, 0.0),
                            Complex64::new(0.0, -1.0),
                        ][(4 * m / order) as usize]
                    } else {
                        cis_cycles(m as f64 / order as f64)
                    }
                })
                .collect();
            let mut rng = seeded(seed);
            Ok(SymbolGrid::from_fn(cfg.l(), cfg.k(), |_, k| {
                if active[k] {
                    points[rng.random_range(0..order as usize)]
                } else {
                    zero
                }
            }))
        }
    }
}

/// `ψ(ν)`: entry `l` is `e^{−j2π(l−1)νT_d}`.
pub fn steering_doppler(cfg: &OfdmConfig, nu: f64) -> Vec<Complex64> {
    (0..cfg.l()).map(|l| cis_cycles(-(l as f64) * nu * cfg.t_d())).collect()
}

/// `φ(τ)`: entry `k` is `e^{+j2π(k−1−⌊K/2⌋)τ/T}`.
pub fn steering_delay(cfg: &OfdmConfig, tau: f64) -> Vec<Complex64> {
    (0..cfg.k())
        .map(|k| cis_cycles(cfg.offset(k) * tau / cfg.t()))
        .collect()
}

/// `H = Ψ(ν) diag(a) Φ†(τ)`.
pub fn channel_coeffs(cfg: &OfdmConfig, chan: &MultipathChannel) -> SymbolGrid {
    coeffs_from_taps(cfg, chan.taps())
}

pub(crate) fn coeffs_from_taps(cfg: &OfdmConfig, taps: &[Tap]) -> SymbolGrid {
    let (l_n, k_n) = (cfg.l(), cfg.k());
    let mut h = SymbolGrid::zeros(l_n, k_n);
    let mut scaled_psi = Vec::with_capacity(l_n);
    for tap in taps {
        scaled_psi.clear();
        scaled_psi.extend(steering_doppler(cfg, tap.nu).into_iter().map(|p| p * tap.gain));
        let phi = steering_delay(cfg, tap.tau);
        let data = h.as_mut_slice();
        for (k, ph) in phi.iter().enumerate() {
            let phc = ph.conj();
            let col = &mut data[k * l_n..(k + 1) * l_n];
            for (dst, ps) in col.iter_mut().zip(&scaled_psi) {
                *dst += ps * phc;
            }
        }
    }
    h
}

/// `H` by direct evaluation of the per-entry sum
/// `Σ_p a_p e^{−j2πν_pT_d(l−1)} e^{−j2π(k−1−⌊K/2⌋)τ_p/T}`.
pub fn channel_coeffs_direct(cfg: &OfdmConfig, chan: &MultipathChannel) -> SymbolGrid {
    SymbolGrid::from_fn(cfg.l(), cfg.k(), |l, k| {
        chan.taps()
            .iter()
            .map(|tap| {
                let cycles = -tap.nu * cfg.t_d() * l as f64 - cfg.offset(k) * tap.tau / cfg.t();
                tap.gain * cis_cycles(cycles)
            })
            .sum()
    })
}

/// `Y = H ⊙ X + Z`, `Z` circular complex Gaussian with variance `σ²` per entry.
pub fn apply_channel(x: &SymbolGrid, h: &SymbolGrid, noise: &NoiseSpec) -> Result<SymbolGrid> {
    let mut y = h.hadamard(x)?;
    if noise.sigma2 > 0.0 {
        let std = (noise.sigma2 / 2.0).sqrt();
        let mut rng = seeded(noise.seed);
        for v in y.as_mut_slice() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * std, im * std);
        }
    } else if noise.sigma2 < 0.0 || noise.sigma2.is_nan() {
        return Err(Error::config("noise variance must be non-negative"));
    }
    Ok(y)
}

/// The `KL × P` matrix `Ω(τ, ν, X)`; column `p` is
/// `vec(X ⊙ ψ(ν_p) φ(τ_p)^†)`, so that `y = Ω a + z`.
pub fn omega_matrix(cfg: &OfdmConfig, x: &SymbolGrid, taus: &[f64], nus: &[f64]) -> Result<DMatrix<Complex64>> {
    cfg.check_grid(x)?;
    if taus.is_empty() || taus.len() != nus.len() {
        return Err(Error::config(
            "omega_matrix needs equal, non-empty delay and Doppler lists",
        ));
    }
    let (l_n, k_n) = (cfg.l(), cfg.k());
    let mut omega = DMatrix::zeros(l_n * k_n, taus.len());
    for (p, (&tau, &nu)) in taus.iter().zip(nus).enumerate() {
        let psi = steering_doppler(cfg, nu);
        let phi = steering_delay(cfg, tau);
        for k in 0..k_n {
            for l in 0..l_n {
                omega[(k * l_n + l, p)] = x[(l, k)] * psi[l] * phi[k].conj();
            }
        }
    }
    Ok(omega)
}
