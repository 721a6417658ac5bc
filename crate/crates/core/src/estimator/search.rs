//! 2-D periodogram and its bisection search.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::math::cis_cycles;
use crate::signal::OfdmConfig;

use super::Domain;

/// Largest per-axis grid after automatic densification.
const MAX_AXIS_POINTS: usize = 4096;

/// Prior interval for one tap and the bisection schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub tau_min: f64,
    pub tau_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Delay grid points per iteration.
    pub m: usize,
    /// Doppler grid points per iteration.
    pub n: usize,
    /// Half-width of the re-centred window, in grid spacings.
    pub beta: f64,
    pub n_bisect: usize,
    pub eps_tau: f64,
    pub eps_nu: f64,
}

impl SearchRegion {
    /// Region with the default schedule: 16×16 points, `β = 1`, eight
    /// iterations, stopping below 10 ps and 1 mHz.
    pub fn new(tau_min: f64, tau_max: f64, nu_min: f64, nu_max: f64) -> Result<Self> {
        let r = Self {
            tau_min,
            tau_max,
            nu_min,
            nu_max,
            m: 16,
            n: 16,
            beta: 1.0,
            n_bisect: 8,
            eps_tau: 1e-11,
            eps_nu: 1e-3,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.tau_min,
            self.tau_max,
            self.nu_min,
            self.nu_max,
            self.beta,
            self.eps_tau,
            self.eps_nu,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("search region values must be finite"));
        }
        if self.tau_min >= self.tau_max || self.nu_min >= self.nu_max {
            return Err(Error::config("search region bounds must satisfy min < max"));
        }
        if self.m < 3 || self.n < 3 {
            return Err(Error::config("search grids need at least 3 points per axis"));
        }
        if self.beta < 0.5 {
            return Err(Error::config("beta must be at least 1/2"));
        }
        if self.n_bisect == 0 {
            return Err(Error::config("n_bisect must be at least 1"));
        }
        if self.eps_tau < 0.0 || self.eps_nu < 0.0 {
            return Err(Error::config("stopping tolerances must be non-negative"));
        }
        Ok(())
    }

    pub fn contains(&self, tau: f64, nu: f64) -> bool {
        tau >= self.tau_min && tau <= self.tau_max && nu >= self.nu_min && nu <= self.nu_max
    }

    /// Grid spacing after `n_bisect` full iterations without densification
    /// or clamping: `span·(2β/M)^{n_bisect−1}/M` per axis.
    pub fn final_resolution(&self) -> (f64, f64) {
        let steps = (self.n_bisect - 1) as i32;
        let dt = (self.tau_max - self.tau_min) * (2.0 * self.beta / self.m as f64).powi(steps) / self.m as f64;
        let dn = (self.nu_max - self.nu_min) * (2.0 * self.beta / self.n as f64).powi(steps) / self.n as f64;
        (dt, dn)
    }
}

/// Result of [`bisection_peak`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionPeak {
    pub tau: f64,
    pub nu: f64,
    /// `ψ†(ν̂) G φ(τ̂)` at the returned point.
    pub value: Complex64,
    pub iterations: usize,
    /// Grid spacings of the last iteration.
    pub resolution: (f64, f64),
    /// The first grid was enlarged to respect the half-main-lobe spacing.
    pub densified: bool,
}

/// The search grid `G` split into real and imaginary columns (one column per
/// subcarrier, `L` entries each).
pub(crate) struct SplitGrid {
    l: usize,
    k: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitGrid {
    pub(crate) fn new(g: &SymbolGrid) -> Self {
        let (re, im) = g.as_slice().iter().map(|v| (v.re, v.im)).unzip();
        Self {
            l: g.rows(),
            k: g.cols(),
            re,
            im,
        }
    }

    fn column(&self, k: usize) -> (&[f64], &[f64]) {
        let r = k * self.l..(k + 1) * self.l;
        (&self.re[r.clone()], &self.im[r])
    }
}

/// `ψ†(ν) G φ(τ) = Σ_k e^{j2πκτ/T} Σ_l e^{j2π(l−1)νT_d} G_{l,k}`.
pub(crate) fn inner_product(cfg: &OfdmConfig, g: &SymbolGrid, tau: f64, nu: f64) -> Complex64 {
    let psi_conj: Vec<Complex64> = (0..cfg.l()).map(|l| cis_cycles(l as f64 * nu * cfg.t_d())).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..cfg.k() {
        let col: Complex64 = g.column(k).iter().zip(&psi_conj).map(|(v, p)| v * p).sum();
        acc += col * cis_cycles(cfg.offset(k) * tau / cfg.t());
    }
    acc
}

/// The grid whose inner products with the steering vectors form the
/// periodogram: `E ⊙ X*` for [`Domain::MatchedY`], `E` itself for
/// [`Domain::ZeroForcingH`].
pub(crate) fn search_grid(e: &SymbolGrid, x: &SymbolGrid, domain: Domain) -> Result<SymbolGrid> {
    match domain {
        Domain::MatchedY => e.hadamard_conj(x),
        Domain::ZeroForcingH => {
            e.same_shape(x)?;
            Ok(e.clone())
        }
    }
}

/// `ψ†(ν)(E ⊙ X*)φ(τ)`; `|·|²` is the 2-D periodogram.
pub fn periodogram(
    cfg: &OfdmConfig,
    e: &SymbolGrid,
    x: &SymbolGrid,
    domain: Domain,
    tau: f64,
    nu: f64,
) -> Result<Complex64> {
    cfg.check_grid(e)?;
    cfg.check_grid(x)?;
    Ok(inner_product(cfg, &search_grid(e, x, domain)?, tau, nu))
}

/// `|ψ†(ν)(E ⊙ X*)φ(τ)|²` on a lattice, Doppler-major
/// (index `i_nu * taus.len() + i_tau`).
pub fn periodogram_map(
    cfg: &OfdmConfig,
    e: &SymbolGrid,
    x: &SymbolGrid,
    domain: Domain,
    taus: &[f64],
    nus: &[f64],
) -> Result<Vec<f64>> {
    cfg.check_grid(e)?;
    cfg.check_grid(x)?;
    let split = SplitGrid::new(&search_grid(e, x, domain)?);
    Ok(evaluate_lattice(cfg, &split, taus, nus))
}

/// `|Υ|²` for every `(τ_m, ν_n)`, Doppler-major.
///
/// First `C_{n,k} = Σ_l conj(ψ_l(ν_n)) G_{l,k}`, then `Υ_{n,m} = Σ_k C_{n,k} φ_k(τ_m)`.
fn evaluate_lattice(cfg: &OfdmConfig, g: &SplitGrid, taus: &[f64], nus: &[f64]) -> Vec<f64> {
    let (l_n, k_n) = (g.l, g.k);
    let n_nu = nus.len();
    let t_d = cfg.t_d();
    // q[l][n] = e^{+j2π lν_nT_d}, Doppler index fastest
    let mut qr = alloc::vec![0.0; l_n * n_nu];
    let mut qi = alloc::vec![0.0; l_n * n_nu];
    for l in 0..l_n {
        for (n, &nu) in nus.iter().enumerate() {
            let v = cis_cycles(l as f64 * nu * t_d);
            qr[l * n_nu + n] = v.re;
            qi[l * n_nu + n] = v.im;
        }
    }
    // c[k][n]
    let mut cr = alloc::vec![0.0; k_n * n_nu];
    let mut ci = alloc::vec![0.0; k_n * n_nu];
    for k in 0..k_n {
        let (gr, gi) = g.column(k);
        let accr = &mut cr[k * n_nu..(k + 1) * n_nu];
        let acci = &mut ci[k * n_nu..(k + 1) * n_nu];
        for l in 0..l_n {
            let (a, b) = (gr[l], gi[l]);
            let rr = &qr[l * n_nu..(l + 1) * n_nu];
            let ri = &qi[l * n_nu..(l + 1) * n_nu];
            for n in 0..n_nu {
                accr[n] += rr[n] * a - ri[n] * b;
                acci[n] += rr[n] * b + ri[n] * a;
            }
        }
    }
    let mut out = alloc::vec![0.0; n_nu * taus.len()];
    for (m, &tau) in taus.iter().enumerate() {
        let mut sr = alloc::vec![0.0; n_nu];
        let mut si = alloc::vec![0.0; n_nu];
        for k in 0..k_n {
            let p = cis_cycles(cfg.offset(k) * tau / cfg.t());
            let (a, b) = (p.re, p.im);
            let rr = &cr[k * n_nu..(k + 1) * n_nu];
            let ri = &ci[k * n_nu..(k + 1) * n_nu];
            for n in 0..n_nu {
                sr[n] += rr[n] * a - ri[n] * b;
                si[n] += rr[n] * b + ri[n] * a;
            }
        }
        for n in 0..n_nu {
            out[n * taus.len() + m] = sr[n] * sr[n] + si[n] * si[n];
        }
    }
    out
}

/// Locates the maximum of `|ψ†(ν)(E ⊙ X*)φ(τ)|²` inside `region` by
/// successive grid refinement.
///
/// Each iteration evaluates an `N × M` lattice `τ_min + (m−1)Δτ`,
/// `ν_min + (n−1)Δν` with `Δ = span/M`, takes the argmax (lowest `(n, m)`
/// on ties) and re-centres a window of half-width `β·Δ` on it, clamped to the
/// original region.
pub fn bisection_peak(
    cfg: &OfdmConfig,
    e: &SymbolGrid,
    x: &SymbolGrid,
    domain: Domain,
    region: &SearchRegion,
) -> Result<BisectionPeak> {
    cfg.check_grid(e)?;
    cfg.check_grid(x)?;
    region.validate()?;
    let g = search_grid(e, x, domain)?;
    let split = SplitGrid::new(&g);
    let mut peak = bisect(cfg, &split, region);
    peak.value = inner_product(cfg, &g, peak.tau, peak.nu);
    Ok(peak)
}

pub(crate) fn bisect(cfg: &OfdmConfig, g: &SplitGrid, region: &SearchRegion) -> BisectionPeak {
    let (mut t0, mut t1) = (region.tau_min, region.tau_max);
    let (mut v0, mut v1) = (region.nu_min, region.nu_max);
    let half_lobe_tau = cfg.t() / (2.0 * cfg.k() as f64);
    let half_lobe_nu = 1.0 / (2.0 * cfg.l() as f64 * cfg.t_d());
    let mut densified = false;
    let mut best = (region.tau_min, region.nu_min);
    let mut resolution = (0.0, 0.0);
    let mut iterations = 0;
    let mut taus = Vec::new();
    let mut nus = Vec::new();

    for it in 0..region.n_bisect {
        let mut m = region.m;
        let mut n = region.n;
        if it == 0 {
            let need_m = ((t1 - t0) / half_lobe_tau).ceil() as usize;
            let need_n = ((v1 - v0) / half_lobe_nu).ceil() as usize;
            if need_m > m {
                m = need_m.min(MAX_AXIS_POINTS);
                densified = true;
            }
            if need_n > n {
                n = need_n.min(MAX_AXIS_POINTS);
                densified = true;
            }
        }
        let dt = (t1 - t0) / m as f64;
        let dn = (v1 - v0) / n as f64;
        taus.clear();
        taus.extend((0..m).map(|i| t0 + i as f64 * dt));
        nus.clear();
        nus.extend((0..n).map(|i| v0 + i as f64 * dn));

        let values = evaluate_lattice(cfg, g, &taus, &nus);
        let mut arg = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > values[arg] {
                arg = i;
            }
        }
        best = (taus[arg % m], nus[arg / m]);
        resolution = (dt, dn);
        iterations = it + 1;
        if dt < region.eps_tau && dn < region.eps_nu {
            break;
        }
        let (ht, hn) = (region.beta * dt, region.beta * dn);
        t0 = (best.0 - ht).max(region.tau_min);
        t1 = (best.0 + ht).min(region.tau_max);
        v0 = (best.1 - hn).max(region.nu_min);
        v1 = (best.1 + hn).min(region.nu_max);
    }

    BisectionPeak {
        tau: best.0,
        nu: best.1,
        value: Complex64::new(0.0, 0.0),
        iterations,
        resolution,
        densified,
    }
}
