//! Transmit ambiguity function of an OFDM packet and the Gram matrix /
//! correlation vector of the least-squares amplitude problem.
//!
//! Three evaluation routes are provided:
//!
//! * [`ambiguity_exact`]: the full quadruple sum over symbol and subcarrier
//!   pairs, including the inter-symbol and inter-carrier terms. Reference
//!   scale only.
//! * [`ambiguity_approx`]: the ISI/ICI-free form
//!   `Ã(τ,ν) = (1/KL) Σ |X_{l,k}|² e^{−j2π(l−1)νT_d} e^{j2π(k−1−⌊K/2⌋)τ/T}`,
//!   which also gives the Gram matrix exactly.
//! * closed forms for unit-modulus symbols: the sinc expressions
//!   ([`ambiguity_psk_closed`], [`ambiguity_psk_null_dc`]) and the exact
//!   geometric sum ([`ambiguity_psk_dirichlet`]).
//!
//! `sinc(x)` is the unnormalised `sin(x)/x` throughout.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::estimator::Domain;
use crate::grid::SymbolGrid;
use crate::math::cis_cycles;
pub use crate::math::sinc;
use crate::signal::OfdmConfig;
use crate::waveform::rect_window_autoambiguity;

use core::f64::consts::PI;

/// Largest `K·L` accepted by [`ambiguity_exact`].
pub const EXACT_SIZE_LIMIT: usize = 4096;

/// Theorem-level ambiguity function of the transmitted waveform with the
/// rectangular window `w̃(t) = 1/√T_d`:
///
/// `A_x(τ,ν) = (1/KL) Σ_{l,k,l',k'} X_{l,k} X*_{l',k'} e^{−j2π(k−k')T_cp/T}
///  e^{j2π(k'−1−⌊K/2⌋)τ/T} e^{−j2πT_d(l−1)(ν − (k−k')/T)}
///  A_w(τ + (l'−l)T_d, ν + (k'−k)/T)`.
pub fn ambiguity_exact(cfg: &OfdmConfig, x: &SymbolGrid, tau: f64, nu: f64) -> Result<Complex64> {
    cfg.check_grid(x)?;
    let size = cfg.k() * cfg.l();
    if size > EXACT_SIZE_LIMIT {
        return Err(Error::ReferenceOnly {
            size,
            limit: EXACT_SIZE_LIMIT,
        });
    }
    let (t, t_d, t_cp) = (cfg.t(), cfg.t_d(), cfg.t_cp());
    let (l_n, k_n) = (cfg.l(), cfg.k());

    // A_w only depends on (l'−l, k'−k); tabulate it once.
    let dl_span = 2 * l_n - 1;
    let dk_span = 2 * k_n - 1;
    let mut aw = Vec::with_capacity(dl_span * dk_span);
    for dl in 0..dl_span {
        let dl = dl as f64 - (l_n - 1) as f64;
        for dk in 0..dk_span {
            let dk = dk as f64 - (k_n - 1) as f64;
            aw.push(rect_window_autoambiguity(cfg, tau + dl * t_d, nu + dk / t));
        }
    }

    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..l_n {
        for k in 0..k_n {
            let xlk = x[(l, k)];
            if xlk == Complex64::new(0.0, 0.0) {
                continue;
            }
            for lp in 0..l_n {
                for kp in 0..k_n {
                    let xc = x[(lp, kp)].conj();
                    if xc == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let dk = k as f64 - kp as f64;
                    let cycles = -dk * t_cp / t + cfg.offset(kp) * tau / t - t_d * l as f64 * (nu - dk / t);
                    let w = aw[(lp + l_n - 1 - l) * dk_span + (kp + k_n - 1 - k)];
                    acc += xlk * xc * cis_cycles(cycles) * w;
                }
            }
        }
    }
    Ok(acc / cfg.kl())
}

/// ISI/ICI-free ambiguity function `Ã_x(τ, ν)` by direct summation.
pub fn ambiguity_approx(cfg: &OfdmConfig, x: &SymbolGrid, tau: f64, nu: f64) -> Complex64 {
    let psi: Vec<Complex64> = (0..cfg.l()).map(|l| cis_cycles(-(l as f64) * nu * cfg.t_d())).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..cfg.k() {
        let phi = cis_cycles(cfg.offset(k) * tau / cfg.t());
        let col: Complex64 = x.column(k).iter().zip(&psi).map(|(v, p)| p * v.norm_sqr()).sum();
        acc += col * phi;
    }
    acc / cfg.kl()
}

/// Sinc closed form for unit-modulus symbols without null subcarriers:
/// `e^{−jπKτ/T} sinc(πKτ/T) sinc(πLνT_d)`.
///
/// This is the large-`K`/`L` approximation of the geometric sum; it differs
/// from [`ambiguity_approx`] in phase and, slightly, in magnitude. See
/// [`ambiguity_psk_dirichlet`] for the exact sum.
pub fn ambiguity_psk_closed(cfg: &OfdmConfig, tau: f64, nu: f64) -> Complex64 {
    let k = cfg.k() as f64;
    let l = cfg.l() as f64;
    let x = tau / cfg.t();
    Complex64::cis(-PI * k * x) * sinc(PI * k * x) * sinc(PI * l * nu * cfg.t_d())
}

/// Sinc closed form with the DC subcarrier `⌊K/2⌋+1` nulled, as commonly
/// quoted for even `K`:
/// `e^{−jπKτ/T} cos[π(K/2+1)τ/T] sinc(πτK/(2T)) sinc(πνT_dL)`.
///
/// Kept verbatim for comparison; it does not reproduce the direct summation
/// (for instance it returns 1 at the origin where the summation gives
/// `(K−1)/K`).
pub fn ambiguity_psk_null_dc(cfg: &OfdmConfig, tau: f64, nu: f64) -> Complex64 {
    let k = cfg.k() as f64;
    let l = cfg.l() as f64;
    let x = tau / cfg.t();
    Complex64::cis(-PI * k * x)
        * (PI * (k / 2.0 + 1.0) * x).cos()
        * sinc(PI * x * k / 2.0)
        * sinc(PI * nu * cfg.t_d() * l)
}

/// Exact geometric-sum closed form of `Ã(τ, ν)` for unit-modulus symbols
/// without null subcarriers (Dirichlet kernels with their linear phases).
pub fn ambiguity_psk_dirichlet(cfg: &OfdmConfig, tau: f64, nu: f64) -> Complex64 {
    let k = cfg.k();
    let l = cfg.l();
    let x = tau / cfg.t();
    let y = nu * cfg.t_d();
    // Σ_{κ=−⌊K/2⌋}^{K−1−⌊K/2⌋} e^{j2πκx} is centred on (K−1)/2 − ⌊K/2⌋
    let centre = (k as f64 - 1.0) / 2.0 - (k / 2) as f64;
    let delay = cis_cycles(centre * x) * dirichlet(k, x);
    let doppler = cis_cycles(-(l as f64 - 1.0) / 2.0 * y) * dirichlet(l, y);
    delay * doppler
}

/// `sin(πnx) / (n sin(πx))`, continuous at integer `x`.
fn dirichlet(n: usize, x: f64) -> f64 {
    let m = x.round();
    let d = x - m;
    let sign = if (m as i64 * (n as i64 - 1)).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    sign * sinc(PI * n as f64 * d) / sinc(PI * d)
}

#[derive(Debug, Clone)]
enum Profile {
    /// Every active entry carries the same weight and nulls are whole
    /// subcarriers, so the sum factorises into delay and Doppler parts.
    Separable {
        weight: f64,
        active: Vec<bool>,
    },
    General(Vec<f64>),
}

/// `Ã(τ, ν)` for a fixed symbol profile, memoised on `(τ, ν)`.
///
/// Used as the look-up table behind the Gram matrix
/// `R_ij = KL·Ã(τ_i − τ_j, ν_j − ν_i)`. One table per worker; not shared.
#[derive(Debug, Clone)]
pub struct AmbiguityTable {
    cfg: OfdmConfig,
    profile: Profile,
    cache: BTreeMap<(u64, u64), Complex64>,
}

const CACHE_LIMIT: usize = 1 << 16;

impl AmbiguityTable {
    /// Table with weights `|X_{l,k}|²`.
    pub fn new(cfg: &OfdmConfig, x: &SymbolGrid) -> Result<Self> {
        Self::for_domain(cfg, x, Domain::MatchedY)
    }

    pub fn for_domain(cfg: &OfdmConfig, x: &SymbolGrid, domain: Domain) -> Result<Self> {
        cfg.check_grid(x)?;
        // Both domains carry the weight |X|²: the zero-forcing estimate
        // YX*/|X| has model |X|⊙H.
        let _ = domain;
        let weights: Vec<f64> = x.as_slice().iter().map(|v| v.norm_sqr()).collect();
        let l_n = cfg.l();
        let reference = weights.iter().copied().find(|&w| w > 0.0).unwrap_or(0.0);
        let mut active = Vec::with_capacity(cfg.k());
        let mut separable = true;
        for k in 0..cfg.k() {
            let col = &weights[k * l_n..(k + 1) * l_n];
            if col.iter().all(|&w| w == 0.0) {
                active.push(false);
            } else if col.iter().all(|&w| w == reference) {
                active.push(true);
            } else {
                separable = false;
                break;
            }
        }
        let profile = if separable {
            Profile::Separable {
                weight: reference,
                active,
            }
        } else {
            Profile::General(weights)
        };
        Ok(Self {
            cfg: cfg.clone(),
            profile,
            cache: BTreeMap::new(),
        })
    }

    /// `Ã(τ, ν)`.
    pub fn value(&mut self, tau: f64, nu: f64) -> Complex64 {
        let key = (tau.to_bits(), nu.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let v = self.evaluate(tau, nu);
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(key, v);
        v
    }

    fn evaluate(&self, tau: f64, nu: f64) -> Complex64 {
        let cfg = &self.cfg;
        let t_d = cfg.t_d();
        match &self.profile {
            Profile::Separable { weight, active } => {
                let doppler: Complex64 = (0..cfg.l()).map(|l| cis_cycles(-(l as f64) * nu * t_d)).sum();
                let delay: Complex64 = (0..cfg.k())
                    .filter(|&k| active[k])
                    .map(|k| cis_cycles(cfg.offset(k) * tau / cfg.t()))
                    .sum();
                doppler * delay * (*weight / cfg.kl())
            }
            Profile::General(weights) => {
                let l_n = cfg.l();
                let psi: Vec<Complex64> = (0..l_n).map(|l| cis_cycles(-(l as f64) * nu * t_d)).collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..cfg.k() {
                    let col: Complex64 = weights[k * l_n..(k + 1) * l_n]
                        .iter()
                        .zip(&psi)
                        .map(|(w, p)| p * *w)
                        .sum();
                    acc += col * cis_cycles(cfg.offset(k) * tau / cfg.t());
                }
                acc / cfg.kl()
            }
        }
    }

    /// `R_ij = KL·Ã(τ_i − τ_j, ν_j − ν_i)`; exactly Hermitian by construction.
    pub fn gram(&mut self, taus: &[f64], nus: &[f64]) -> DMatrix<Complex64> {
        assert_eq!(taus.len(), nus.len());
        let p = taus.len();
        let kl = self.cfg.kl();
        let mut r = DMatrix::zeros(p, p);
        let diag = self.value(0.0, 0.0) * kl;
        for i in 0..p {
            r[(i, i)] = Complex64::new(diag.re, 0.0);
            for j in i + 1..p {
                let v = self.value(taus[i] - taus[j], nus[j] - nus[i]) * kl;
                r[(i, j)] = v;
                r[(j, i)] = v.conj();
            }
        }
        r
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.len()
    }
}

/// Gram matrix `R = Ω†Ω` assembled from the ambiguity function.
pub fn gram_matrix(cfg: &OfdmConfig, x: &SymbolGrid, taus: &[f64], nus: &[f64]) -> Result<DMatrix<Complex64>> {
    if taus.len() != nus.len() {
        return Err(Error::config("delay and Doppler lists differ in length"));
    }
    Ok(AmbiguityTable::new(cfg, x)?.gram(taus, nus))
}

/// `w_i = ψ†(ν_i) (Y ⊙ X*) φ(τ_i)`, i.e. `Ω† vec(Y)`.
pub fn correlation_vector(
    cfg: &OfdmConfig,
    y: &SymbolGrid,
    x: &SymbolGrid,
    taus: &[f64],
    nus: &[f64],
) -> Result<Vec<Complex64>> {
    cfg.check_grid(y)?;
    cfg.check_grid(x)?;
    if taus.len() != nus.len() {
        return Err(Error::config("delay and Doppler lists differ in length"));
    }
    let g = y.hadamard_conj(x)?;
    Ok(taus
        .iter()
        .zip(nus)
        .map(|(&tau, &nu)| crate::estimator::inner_product(cfg, &g, tau, nu))
        .collect())
}

/// Which expression to sample on an [`AmbiguityGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbiguityForm {
    /// Direct summation over the symbol grid.
    Approx,
    /// Sinc closed form (unit modulus, no nulls).
    PskClosed,
    /// Sinc closed form with a DC null.
    PskNullDc,
    /// Exact geometric sum (unit modulus, no nulls).
    PskDirichlet,
}

/// Samples of an ambiguity function on a `(τ, ν)` lattice.
///
/// `values` is stored Doppler-major: index `i_nu * tau_axis.len() + i_tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityGrid {
    pub tau_axis: Vec<f64>,
    pub nu_axis: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl AmbiguityGrid {
    pub fn compute(
        cfg: &OfdmConfig,
        x: &SymbolGrid,
        tau_axis: Vec<f64>,
        nu_axis: Vec<f64>,
        form: AmbiguityForm,
    ) -> Result<Self> {
        let mut table = AmbiguityTable::new(cfg, x)?;
        let mut values = Vec::with_capacity(tau_axis.len() * nu_axis.len());
        for &nu in &nu_axis {
            for &tau in &tau_axis {
                values.push(match form {
                    AmbiguityForm::Approx => table.value(tau, nu),
                    AmbiguityForm::PskClosed => ambiguity_psk_closed(cfg, tau, nu),
                    AmbiguityForm::PskNullDc => ambiguity_psk_null_dc(cfg, tau, nu),
                    AmbiguityForm::PskDirichlet => ambiguity_psk_dirichlet(cfg, tau, nu),
                });
            }
        }
        Ok(Self {
            tau_axis,
            nu_axis,
            values,
        })
    }

    pub fn get(&self, i_tau: usize, i_nu: usize) -> Complex64 {
        self.values[i_nu * self.tau_axis.len() + i_tau]
    }

    /// `(τ, ν, A)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        let nt = self.tau_axis.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.tau_axis[i % nt], self.nu_axis[i / nt], *v))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{generate_symbols, omega_matrix, Constellation};
    use crate::waveform::{synth_tx, WaveformConfig};
    use alloc::vec;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(k: usize, l: usize, t_cp: f64, nulls: &[usize]) -> OfdmConfig {
        OfdmConfig::new(k, l, 6.4e-6, t_cp, nulls).unwrap()
    }

    /// `∫ x(t) x*(t−τ) e^{−j2πνt} dt` on the sampled waveform, `τ` a whole
    /// number of samples.
    fn integrate(cfg: &OfdmConfig, x: &SymbolGrid, shift: isize, nu: f64) -> (f64, Complex64) {
        let w = synth_tx(cfg, x, &WaveformConfig::new(16).unwrap()).unwrap();
        let n = w.samples.len() as isize;
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            let j = i - shift;
            if (0..n).contains(&j) {
                acc += w.samples[i as usize] * w.samples[j as usize].conj() * cis_cycles(-nu * w.time(i as usize));
            }
        }
        (shift as f64 * w.dt, acc * w.dt)
    }

    #[test]
    fn exact_matches_numerical_integration() {
        let cfg = cfg(4, 2, 1.6e-6, &[]);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 3).unwrap();
        for (shift, nu) in [(0, 0.0), (5, 0.0), (-7, 2.0e4), (40, -6.0e4), (83, 1.1e5)] {
            let (tau, num) = integrate(&cfg, &x, shift, nu);
            let exact = ambiguity_exact(&cfg, &x, tau, nu).unwrap();
            assert!((exact - num).norm() < 2e-3, "shift {shift} nu {nu}: {exact} vs {num}");
        }
    }

    #[test]
    fn exact_is_unit_at_origin_without_prefix() {
        let cfg = cfg(4, 2, 0.0, &[]);
        for seed in 0..4 {
            let x = generate_symbols(&cfg, Constellation::Psk(4), seed).unwrap();
            let v = ambiguity_exact(&cfg, &x, 0.0, 0.0).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_splits_into_diagonal_and_cross_terms() {
        let cfg = cfg(4, 2, 1.6e-6, &[]);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 11).unwrap();
        let (t, t_d, t_cp) = (cfg.t(), cfg.t_d(), cfg.t_cp());
        for (tau, nu) in [(0.3e-6, 1.5e4), (-1.1e-6, -4.0e4), (2.0e-6, 7.0e4)] {
            // l ≠ l' or k ≠ k' terms, written out independently
            let mut cross = c(0.0, 0.0);
            for l in 0..2 {
                for k in 0..4 {
                    for lp in 0..2 {
                        for kp in 0..4 {
                            if l == lp && k == kp {
                                continue;
                            }
                            let dk = k as f64 - kp as f64;
                            let dl = lp as f64 - l as f64;
                            let kappa = kp as f64 - 2.0;
                            let phase = -dk * t_cp / t + kappa * tau / t - t_d * l as f64 * (nu - dk / t);
                            cross += x[(l, k)]
                                * x[(lp, kp)].conj()
                                * cis_cycles(phase)
                                * rect_window_autoambiguity(&cfg, tau + dl * t_d, nu - dk / t);
                        }
                    }
                }
            }
            cross /= 8.0;
            let diag = rect_window_autoambiguity(&cfg, tau, nu) * ambiguity_approx(&cfg, &x, tau, nu);
            let exact = ambiguity_exact(&cfg, &x, tau, nu).unwrap();
            assert!((exact - diag - cross).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_magnitude_is_symmetric() {
        let cfg = cfg(4, 3, 1.6e-6, &[]);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        for tau in linspace(-3e-6, 3e-6, 5) {
            for nu in linspace(-1e5, 1e5, 5) {
                let a = ambiguity_exact(&cfg, &x, tau, nu).unwrap().norm();
                let b = ambiguity_exact(&cfg, &x, -tau, -nu).unwrap().norm();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_rejects_large_instances() {
        let cfg = cfg(128, 64, 1.6e-6, &[]);
        let x = SymbolGrid::filled(64, 128, c(1.0, 0.0));
        assert_eq!(
            ambiguity_exact(&cfg, &x, 0.0, 0.0),
            Err(Error::ReferenceOnly {
                size: 8192,
                limit: EXACT_SIZE_LIMIT
            })
        );
    }

    #[test]
    fn approx_values() {
        let cfg = cfg(16, 8, 1.6e-6, &[]);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 1).unwrap();
        assert!((ambiguity_approx(&cfg, &x, 0.0, 0.0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(ambiguity_approx(&cfg, &x, cfg.t() / 16.0, 0.0).norm() < 1e-12);
        assert!(ambiguity_approx(&cfg, &x, 0.0, 1.0 / (8.0 * cfg.t_d())).norm() < 1e-12);
    }

    #[test]
    fn dirichlet_form_equals_summation() {
        for (k, l) in [(16, 8), (15, 5), (52, 90)] {
            let cfg = cfg(k, l, 1.6e-6, &[]);
            let x = generate_symbols(&cfg, Constellation::Psk(8), 4).unwrap();
            for tau in linspace(-2.0 * cfg.t(), 2.0 * cfg.t(), 20) {
                for nu in linspace(-3.0 / cfg.t_d(), 3.0 / cfg.t_d(), 20) {
                    let d = ambiguity_psk_dirichlet(&cfg, tau, nu) - ambiguity_approx(&cfg, &x, tau, nu);
                    assert!(d.norm() < 1e-12, "K={k} L={l} tau={tau} nu={nu}: {}", d.norm());
                }
            }
        }
    }

    #[test]
    fn sinc_form_values() {
        let cfg52 = cfg(52, 90, 1.6e-6, &[]);
        assert!((ambiguity_psk_closed(&cfg52, 0.0, 0.0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(ambiguity_psk_closed(&cfg52, 0.0, 1.0 / (90.0 * cfg52.t_d())).norm() < 1e-15);
        let half = ambiguity_psk_closed(&cfg52, 0.0, 0.5 / (90.0 * cfg52.t_d()));
        assert!((half.norm() - 2.0 / PI).abs() < 1e-12);
        // magnitudes track the exact sum near the main lobe; the phase does not
        let x = SymbolGrid::filled(90, 52, c(1.0, 0.0));
        let (tau, nu) = (0.3 * cfg52.t() / 52.0, 0.2 / (90.0 * cfg52.t_d()));
        let approx = ambiguity_approx(&cfg52, &x, tau, nu);
        let closed = ambiguity_psk_closed(&cfg52, tau, nu);
        assert!((approx.norm() - closed.norm()).abs() < 1e-3);
        assert!((approx - closed).norm() > 1e-3);
    }

    #[test]
    fn null_dc_form_as_printed() {
        let cfg = cfg(52, 90, 1.6e-6, &[27]);
        assert!((ambiguity_psk_null_dc(&cfg, 0.0, 0.0) - c(1.0, 0.0)).norm() < 1e-15);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        // the summation loses the nulled carrier's energy at the origin
        let at_origin = ambiguity_approx(&cfg, &x, 0.0, 0.0);
        assert!((at_origin - c(51.0 / 52.0, 0.0)).norm() < 1e-12);
        // Doppler dependence factorises
        let (n1, n2) = (0.2 / (90.0 * cfg.t_d()), 0.7 / (90.0 * cfg.t_d()));
        let expect = sinc(PI * 90.0 * n1 * cfg.t_d()) / sinc(PI * 90.0 * n2 * cfg.t_d());
        for tau in [0.01e-6, 0.05e-6, 0.09e-6] {
            let ratio = ambiguity_psk_null_dc(&cfg, tau, n1) / ambiguity_psk_null_dc(&cfg, tau, n2);
            assert!((ratio - c(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn doppler_null_halves_with_twice_the_symbols() {
        let first_null = |l: usize| {
            let cfg = cfg(16, l, 1.6e-6, &[]);
            let x = SymbolGrid::filled(l, 16, c(1.0, 0.0));
            let step = 1.0 / (64.0 * l as f64 * cfg.t_d());
            (1..1000)
                .map(|i| i as f64 * step)
                .find(|&nu| ambiguity_approx(&cfg, &x, 0.0, nu).norm() < 1e-9)
                .unwrap()
        };
        let (a, b) = (first_null(8), first_null(16));
        assert!((a / b - 2.0).abs() < 1e-9);
        let delay_null = |l: usize| {
            let cfg = cfg(16, l, 1.6e-6, &[]);
            let x = SymbolGrid::filled(l, 16, c(1.0, 0.0));
            ambiguity_approx(&cfg, &x, cfg.t() / 16.0, 0.0).norm()
        };
        assert!(delay_null(8) < 1e-12 && delay_null(16) < 1e-12);
    }

    #[test]
    fn gram_matches_brute_force() {
        let cfg = cfg(4, 3, 1.6e-6, &[]);
        let x = SymbolGrid::filled(3, 4, c(1.0, 0.0));
        let taus = [0.13e-6, 0.71e-6];
        let nus = [1.2e4, -3.4e4];
        let r = gram_matrix(&cfg, &x, &taus, &nus).unwrap();
        let omega = omega_matrix(&cfg, &x, &taus, &nus).unwrap();
        let brute = omega.adjoint() * &omega;
        for (a, b) in r.iter().zip(brute.iter()) {
            assert!((a - b).norm() <= 1e-10 * 12.0);
        }
        let one = gram_matrix(&cfg, &x, &taus[..1], &nus[..1]).unwrap();
        assert!((one[(0, 0)] - c(12.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gram_off_diagonal_vanishes_one_cell_apart() {
        let cfg = cfg(16, 4, 1.6e-6, &[]);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 2).unwrap();
        let r = gram_matrix(&cfg, &x, &[0.1e-6, 0.1e-6 + cfg.t() / 16.0], &[300.0, 300.0]).unwrap();
        assert!(r[(0, 1)].norm() < 1e-10);
    }

    #[test]
    fn gram_is_hermitian_psd() {
        let cfg = cfg(8, 4, 1.6e-6, &[5]);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 8).unwrap();
        let taus = [0.0, 0.2e-6, 0.25e-6, 1.0e-6];
        let nus = [0.0, 5e3, -2e3, 1e4];
        let r = gram_matrix(&cfg, &x, &taus, &nus).unwrap();
        assert_eq!(r, r.adjoint());
        let eig = r.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e >= -1e-9 * 32.0));
    }

    #[test]
    fn table_paths_agree() {
        // separable (uniform weights with null carriers) vs general weights
        let cfg = cfg(8, 4, 1.6e-6, &[2, 5]);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 1).unwrap();
        let mut table = AmbiguityTable::new(&cfg, &x).unwrap();
        let mut ragged = x.clone();
        ragged[(2, 3)] = c(0.5, 0.0);
        let mut general = AmbiguityTable::new(&cfg, &ragged).unwrap();
        for (tau, nu) in [(0.0, 0.0), (0.3e-6, 2e4), (-1.2e-6, -5e4)] {
            assert!((table.value(tau, nu) - ambiguity_approx(&cfg, &x, tau, nu)).norm() < 1e-14);
            assert!((general.value(tau, nu) - ambiguity_approx(&cfg, &ragged, tau, nu)).norm() < 1e-14);
        }
        table.value(0.0, 0.0);
        assert_eq!(table.cached_entries(), 3);
    }

    #[test]
    fn correlation_vector_cases() {
        let cfg = cfg(8, 4, 1.6e-6, &[]);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let a = c(0.6, -0.2);
        let tap = crate::signal::Tap::new(a, 0.4e-6, 2.5e3);
        let y = crate::signal::coeffs_from_taps(&cfg, &[tap]).hadamard(&x).unwrap();
        let w = correlation_vector(&cfg, &y, &x, &[tap.tau], &[tap.nu]).unwrap();
        assert!((w[0] - a * 32.0).norm() < 1e-12);

        let zero = SymbolGrid::zeros(4, 8);
        let w0 = correlation_vector(&cfg, &zero, &x, &[0.1e-6, 0.2e-6], &[1.0, 2.0]).unwrap();
        assert_eq!(w0, vec![c(0.0, 0.0); 2]);

        let psk = generate_symbols(&cfg, Constellation::Psk(4), 6).unwrap();
        let noisy = SymbolGrid::from_fn(4, 8, |l, k| c((l * 3 + k) as f64 * 0.1, (k as f64).sin()));
        let taus = [0.1e-6, 0.9e-6, 1.3e-6];
        let nus = [-1e4, 0.0, 3e3];
        let w = correlation_vector(&cfg, &noisy, &psk, &taus, &nus).unwrap();
        let omega = omega_matrix(&cfg, &psk, &taus, &nus).unwrap();
        let brute = omega.adjoint() * DVector::from_column_slice(noisy.as_slice());
        for (a, b) in w.iter().zip(brute.iter()) {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
        }
        assert!(correlation_vector(&cfg, &SymbolGrid::zeros(3, 8), &x, &taus, &nus).is_err());
    }

    #[test]
    fn grid_layout() {
        let cfg = cfg(8, 4, 1.6e-6, &[]);
        let x = SymbolGrid::filled(4, 8, c(1.0, 0.0));
        let g = AmbiguityGrid::compute(
            &cfg,
            &x,
            linspace(-1e-6, 1e-6, 5),
            linspace(-1e4, 1e4, 3),
            AmbiguityForm::Approx,
        )
        .unwrap();
        assert_eq!(g.values.len(), 15);
        assert!((g.get(2, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(g.max_magnitude() <= 1.0 + 1e-9);
        let (tau, nu, v) = g.iter().nth(7).unwrap();
        assert_eq!((tau, nu), (0.0, 0.0));
        assert_eq!(v, g.get(2, 1));
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }
}
