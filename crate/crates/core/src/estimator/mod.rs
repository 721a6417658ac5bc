//! Multipath parameter estimation: successive cancellation for the initial
//! estimate, parallel cancellation for refinement, least-squares amplitudes
//! and the single-tap Cramér–Rao bound.

mod crlb;
mod lsq;
mod search;

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ambiguity::AmbiguityTable;
use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::signal::{coeffs_from_taps, omega_matrix, OfdmConfig, Tap};

pub use crlb::{crlb_single_tap, Crlb};
pub use lsq::{ls_amplitudes, MAX_CONDITION};
pub(crate) use search::inner_product;
pub use search::{bisection_peak, periodogram, periodogram_map, BisectionPeak, SearchRegion};

use search::{bisect, search_grid, SplitGrid};

/// Which grid the estimator operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Domain {
    /// The received grid `Y`; periodograms use `E ⊙ X*`.
    #[default]
    MatchedY,
    /// The zero-forcing estimate `Ĥ = Y ⊙ X* / |X|` (zero on nulls);
    /// periodograms use `E` directly.
    ZeroForcingH,
}

/// How the Gram matrix is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GramSource {
    /// Memoised ambiguity-function look-up.
    #[default]
    Table,
    /// `Ω†Ω` formed explicitly. For validation.
    BruteForce,
}

/// A recovered tap: complex gain, delay in seconds, Doppler in Hz.
pub type TapEstimate = Tap;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOptions {
    /// Number of taps to extract.
    pub p: usize,
    /// Refinement sweeps; 0 disables refinement.
    pub refine_iterations: usize,
    /// Stop the initial estimate once a new tap's `|â|` falls below this.
    pub gamma: Option<f64>,
    pub domain: Domain,
    /// Stop refining once the relative drop in `‖E‖²` falls below this,
    /// returning the best iterate seen.
    pub early_stop_tol: Option<f64>,
    pub gram: GramSource,
}

impl EstimatorOptions {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            refine_iterations: 0,
            gamma: None,
            domain: Domain::MatchedY,
            early_stop_tol: None,
            gram: GramSource::Table,
        }
    }

    pub fn with_refinement(mut self, iterations: usize) -> Self {
        self.refine_iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::config("P must be at least 1"));
        }
        if let Some(g) = self.gamma {
            if g.is_nan() || g < 0.0 {
                return Err(Error::config("gamma must be non-negative"));
            }
        }
        if let Some(t) = self.early_stop_tol {
            if t.is_nan() || t < 0.0 {
                return Err(Error::config("early_stop_tol must be non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub taps: Vec<TapEstimate>,
    /// `‖E‖²` after each stage: the input, then each extracted tap, then each
    /// refinement sweep.
    pub residual_energy: Vec<f64>,
    pub refine_iters_used: usize,
    /// Some bisection search had to enlarge its first grid.
    pub densified: bool,
}

impl EstimateSet {
    pub fn final_residual(&self) -> f64 {
        self.residual_energy.last().copied().unwrap_or(0.0)
    }
}

/// Observation, model weight and Gram source for one packet.
struct Problem<'a> {
    cfg: &'a OfdmConfig,
    domain: Domain,
    /// `Y`, or `Ĥ` in the zero-forcing domain.
    obs: SymbolGrid,
    /// Model weight `V` with `obs ≈ V ⊙ H`: `X`, or `|X|`.
    weight: SymbolGrid,
    /// `obs ⊙ V*`, whose steering inner products give `w`.
    corr: SymbolGrid,
    x: &'a SymbolGrid,
    table: AmbiguityTable,
    gram: GramSource,
}

impl<'a> Problem<'a> {
    fn new(cfg: &'a OfdmConfig, y: &SymbolGrid, x: &'a SymbolGrid, opts: &EstimatorOptions) -> Result<Self> {
        cfg.check_grid(y)?;
        cfg.check_grid(x)?;
        let (obs, weight) = match opts.domain {
            Domain::MatchedY => (y.clone(), x.clone()),
            Domain::ZeroForcingH => {
                let h = SymbolGrid::from_fn(cfg.l(), cfg.k(), |l, k| {
                    let xv = x[(l, k)];
                    let mag = xv.norm();
                    if mag > 0.0 {
                        y[(l, k)] * xv.conj() / mag
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                let v = SymbolGrid::from_fn(cfg.l(), cfg.k(), |l, k| Complex64::new(x[(l, k)].norm(), 0.0));
                (h, v)
            }
        };
        let corr = obs.hadamard_conj(&weight)?;
        Ok(Self {
            cfg,
            domain: opts.domain,
            obs,
            weight,
            corr,
            x,
            table: AmbiguityTable::for_domain(cfg, x, opts.domain)?,
            gram: opts.gram,
        })
    }

    /// `V ⊙ H(taps)`.
    fn model(&self, taps: &[Tap]) -> SymbolGrid {
        let mut m = coeffs_from_taps(self.cfg, taps);
        for (v, w) in m.as_mut_slice().iter_mut().zip(self.weight.as_slice()) {
            *v *= w;
        }
        m
    }

    fn residual(&self, taps: &[Tap]) -> SymbolGrid {
        let mut e = self.obs.clone();
        for (v, m) in e.as_mut_slice().iter_mut().zip(self.model(taps).as_slice()) {
            *v -= m;
        }
        e
    }

    fn search(&self, e: &SymbolGrid, region: &SearchRegion) -> Result<BisectionPeak> {
        let g = search_grid(e, self.x, self.domain)?;
        let mut peak = bisect(self.cfg, &SplitGrid::new(&g), region);
        peak.value = inner_product(self.cfg, &g, peak.tau, peak.nu);
        Ok(peak)
    }

    fn gram_matrix(&mut self, taus: &[f64], nus: &[f64]) -> Result<DMatrix<Complex64>> {
        match self.gram {
            GramSource::Table => Ok(self.table.gram(taus, nus)),
            GramSource::BruteForce => {
                let omega = omega_matrix(self.cfg, &self.weight, taus, nus)?;
                Ok(omega.adjoint() * omega)
            }
        }
    }

    fn amplitudes(&mut self, taus: &[f64], nus: &[f64]) -> Result<Vec<Complex64>> {
        let r = self.gram_matrix(taus, nus)?;
        let w: Vec<Complex64> = taus
            .iter()
            .zip(nus)
            .map(|(&tau, &nu)| inner_product(self.cfg, &self.corr, tau, nu))
            .collect();
        ls_amplitudes(&r, &w)
    }
}

fn assemble(taus: &[f64], nus: &[f64], gains: &[Complex64]) -> Vec<Tap> {
    taus.iter()
        .zip(nus)
        .zip(gains)
        .map(|((&tau, &nu), &gain)| Tap::new(gain, tau, nu))
        .collect()
}

/// Successive cancellation: each stage locates the strongest remaining peak
/// of the residual periodogram, re-solves all amplitudes jointly and
/// subtracts the full reconstruction from the observation.
pub fn initial_estimate(
    cfg: &OfdmConfig,
    y: &SymbolGrid,
    x: &SymbolGrid,
    opts: &EstimatorOptions,
    region: &SearchRegion,
) -> Result<EstimateSet> {
    opts.validate()?;
    region.validate()?;
    let mut prob = Problem::new(cfg, y, x, opts)?;
    let mut residual = prob.obs.clone();
    let mut trace = alloc::vec![residual.energy()];
    let mut taps = Vec::new();
    let mut taus = Vec::with_capacity(opts.p);
    let mut nus = Vec::with_capacity(opts.p);
    let mut densified = false;

    for p in 0..opts.p {
        let peak = prob.search(&residual, region)?;
        densified |= peak.densified;
        taus.push(peak.tau);
        nus.push(peak.nu);
        let gains = prob.amplitudes(&taus, &nus)?;
        if let Some(gamma) = opts.gamma {
            if gains[p].norm() < gamma {
                break;
            }
        }
        taps = assemble(&taus, &nus, &gains);
        residual = prob.residual(&taps);
        trace.push(residual.energy());
    }

    Ok(EstimateSet {
        taps,
        residual_energy: trace,
        refine_iters_used: 0,
        densified,
    })
}

/// Parallel cancellation: each sweep re-locates every tap against the
/// residual that omits only that tap (all subtractions use the previous
/// sweep's parameters), then re-solves the amplitudes.
pub fn refine(
    cfg: &OfdmConfig,
    y: &SymbolGrid,
    x: &SymbolGrid,
    initial: &EstimateSet,
    opts: &EstimatorOptions,
    region: &SearchRegion,
) -> Result<EstimateSet> {
    opts.validate()?;
    region.validate()?;
    if opts.refine_iterations == 0 || initial.taps.is_empty() {
        return Ok(initial.clone());
    }
    let mut prob = Problem::new(cfg, y, x, opts)?;
    let mut current = initial.taps.clone();
    let mut current_energy = prob.residual(&current).energy();
    let mut best = (current.clone(), current_energy);
    let mut trace = initial.residual_energy.clone();
    let mut densified = initial.densified;
    let mut used = 0;

    for sweep in 0..opts.refine_iterations {
        let full = prob.residual(&current);
        let mut taus = Vec::with_capacity(current.len());
        let mut nus = Vec::with_capacity(current.len());
        for tap in &current {
            let own = prob.model(core::slice::from_ref(tap));
            let e = full.add(&own)?;
            let peak = prob.search(&e, region)?;
            densified |= peak.densified;
            taus.push(peak.tau);
            nus.push(peak.nu);
        }
        let gains = prob.amplitudes(&taus, &nus)?;
        let next = assemble(&taus, &nus, &gains);
        let energy = prob.residual(&next).energy();
        trace.push(energy);
        used = sweep + 1;

        let previous = current_energy;
        current = next;
        current_energy = energy;
        if let Some(tol) = opts.early_stop_tol {
            if energy < best.1 {
                best = (current.clone(), energy);
            }
            let gain = if previous > 0.0 {
                (previous - energy) / previous
            } else {
                0.0
            };
            if gain < tol {
                break;
            }
        }
    }

    let taps = if opts.early_stop_tol.is_some() { best.0 } else { current };
    Ok(EstimateSet {
        taps,
        residual_energy: trace,
        refine_iters_used: used,
        densified,
    })
}

/// [`initial_estimate`] followed by [`refine`].
pub fn estimate(
    cfg: &OfdmConfig,
    y: &SymbolGrid,
    x: &SymbolGrid,
    opts: &EstimatorOptions,
    region: &SearchRegion,
) -> Result<(EstimateSet, EstimateSet)> {
    let initial = initial_estimate(cfg, y, x, opts, region)?;
    let refined = refine(cfg, y, x, &initial, opts, region)?;
    Ok((initial, refined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::ambiguity_approx;
    use crate::signal::{apply_channel, generate_symbols, Constellation, MultipathChannel, NoiseSpec};
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small() -> OfdmConfig {
        OfdmConfig::new(16, 8, 6.4e-6, 1.6e-6, &[]).unwrap()
    }

    fn observe(cfg: &OfdmConfig, x: &SymbolGrid, taps: &[Tap]) -> SymbolGrid {
        coeffs_from_taps(cfg, taps).hadamard(x).unwrap()
    }

    fn three_taps() -> Vec<Tap> {
        vec![
            Tap::new(c(0.8, 0.6), 20e-9, -400.0),
            Tap::new(c(-0.2, 0.25), 100e-9, 350.0),
            Tap::new(c(0.0, -0.1), 180e-9, -20.0),
        ]
    }

    fn section_v(l: usize) -> (OfdmConfig, SearchRegion) {
        let cfg = OfdmConfig::new(52, l, 6.4e-6, 1.6e-6, &[]).unwrap();
        (cfg, SearchRegion::new(0.0, 200e-9, -500.0, 500.0).unwrap())
    }

    #[test]
    fn region_validation() {
        assert!(SearchRegion::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(SearchRegion::new(0.0, 1.0, 0.0, 0.0).is_err());
        let mut r = SearchRegion::new(0.0, 1e-6, -1.0, 1.0).unwrap();
        r.m = 2;
        assert!(r.validate().is_err());
        r.m = 3;
        r.beta = 0.4;
        assert!(r.validate().is_err());
        r.beta = 0.5;
        r.eps_nu = -1.0;
        assert!(r.validate().is_err());
        assert!(EstimatorOptions::new(0).validate().is_err());
        let mut o = EstimatorOptions::new(2);
        o.gamma = Some(-0.1);
        assert!(o.validate().is_err());
    }

    #[test]
    fn periodogram_cases() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let zero = SymbolGrid::zeros(8, 16);
        assert_eq!(
            periodogram(&cfg, &zero, &x, Domain::MatchedY, 1e-7, 30.0).unwrap(),
            c(0.0, 0.0)
        );
        let a = c(0.3, -0.7);
        let tap = Tap::new(a, 150e-9, 900.0);
        let y = observe(&cfg, &x, &[tap]);
        let at_truth = periodogram(&cfg, &y, &x, Domain::MatchedY, tap.tau, tap.nu).unwrap();
        assert!((at_truth - a * 128.0).norm() < 1e-12);
        // offset evaluation is a shifted copy of the ambiguity function
        for (dt, dn) in [(30e-9, 0.0), (-50e-9, 400.0), (120e-9, -2500.0)] {
            let v = periodogram(&cfg, &y, &x, Domain::MatchedY, tap.tau + dt, tap.nu + dn).unwrap();
            let expect = a * 128.0 * ambiguity_approx(&cfg, &x, dt, -dn);
            assert!((v - expect).norm() < 1e-9, "{v} vs {expect}");
        }
        assert!(periodogram(&cfg, &SymbolGrid::zeros(4, 16), &x, Domain::MatchedY, 0.0, 0.0).is_err());
    }

    #[test]
    fn periodogram_map_matches_pointwise() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::Psk(4), 3).unwrap();
        let y = observe(&cfg, &x, &three_taps());
        let taus = [0.0, 50e-9, 133e-9];
        let nus = [-300.0, 10.0];
        let map = periodogram_map(&cfg, &y, &x, Domain::MatchedY, &taus, &nus).unwrap();
        for (n, &nu) in nus.iter().enumerate() {
            for (m, &tau) in taus.iter().enumerate() {
                let p = periodogram(&cfg, &y, &x, Domain::MatchedY, tau, nu).unwrap().norm_sqr();
                assert!((map[n * 3 + m] - p).abs() < 1e-9 * p.max(1.0));
            }
        }
    }

    #[test]
    fn bisection_finds_a_single_tap() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let region = SearchRegion::new(0.0, 400e-9, -2000.0, 2000.0).unwrap();
        let tap = Tap::new(c(1.0, 0.0), 123.4e-9, -765.4);
        let peak = bisection_peak(&cfg, &observe(&cfg, &x, &[tap]), &x, Domain::MatchedY, &region).unwrap();
        let (rt, rn) = region.final_resolution();
        assert!((peak.tau - tap.tau).abs() <= rt.max(region.eps_tau));
        assert!((peak.nu - tap.nu).abs() <= rn.max(region.eps_nu));
        assert!(!peak.densified);
        assert!((peak.value - c(128.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn bisection_reaches_the_region_corner() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let region = SearchRegion::new(0.0, 400e-9, -2000.0, 2000.0).unwrap();
        let tap = Tap::new(c(1.0, 0.0), 400e-9, 2000.0);
        let peak = bisection_peak(&cfg, &observe(&cfg, &x, &[tap]), &x, Domain::MatchedY, &region).unwrap();
        assert!((peak.tau - 400e-9).abs() <= 2.0 * peak.resolution.0);
        assert!((peak.nu - 2000.0).abs() <= 2.0 * peak.resolution.1);
        assert!(region.contains(peak.tau, peak.nu));
    }

    #[test]
    fn bisection_on_a_constant_grid() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let region = SearchRegion::new(-200e-9, 200e-9, -2000.0, 2000.0).unwrap();
        let e = SymbolGrid::filled(8, 16, c(2.0, 0.0));
        let peak = bisection_peak(&cfg, &e, &x, Domain::MatchedY, &region).unwrap();
        assert!(peak.tau.abs() <= peak.resolution.0.max(region.eps_tau));
        assert!(peak.nu.abs() <= peak.resolution.1.max(region.eps_nu));
        // a flat map returns the first grid point
        let flat = bisection_peak(&cfg, &SymbolGrid::zeros(8, 16), &x, Domain::MatchedY, &region).unwrap();
        assert_eq!((flat.tau, flat.nu), (region.tau_min, region.nu_min));
    }

    #[test]
    fn bisection_densifies_wide_regions() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let region = SearchRegion::new(0.0, 6.0e-6, -2000.0, 2000.0).unwrap();
        let tap = Tap::new(c(1.0, 0.0), 4.1e-6, 100.0);
        let peak = bisection_peak(&cfg, &observe(&cfg, &x, &[tap]), &x, Domain::MatchedY, &region).unwrap();
        assert!(peak.densified);
        assert!((peak.tau - tap.tau).abs() < 1e-10);
    }

    #[test]
    fn ls_cases() {
        let r = DMatrix::from_element(1, 1, c(12.0, 0.0));
        assert_eq!(ls_amplitudes(&r, &[c(6.0, 3.0)]).unwrap(), vec![c(0.5, 0.25)]);
        let r2 = DMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]);
        assert_eq!(ls_amplitudes(&r2, &[c(0.0, 0.0); 2]).unwrap(), vec![c(0.0, 0.0); 2]);
        let w = [c(1.0, 2.0), c(-0.5, 0.1)];
        let a = ls_amplitudes(&r2, &w).unwrap();
        let back = &r2 * nalgebra::DVector::from_column_slice(&a);
        for (b, w) in back.iter().zip(&w) {
            assert!((b - w).norm() <= 1e-8 * 2.3);
        }
        let sing = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
            ],
        );
        match ls_amplitudes(&sing, &[c(1.0, 0.0); 3]) {
            Err(Error::SingularGram { taps, .. }) => assert_eq!(taps, Some((1, 2))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn joint_amplitudes_at_true_parameters() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::Psk(4), 5).unwrap();
        let taps = [
            Tap::new(c(0.9, 0.1), 40e-9, 300.0),
            Tap::new(c(-0.3, 0.4), 300e-9, -1200.0),
        ];
        let y = observe(&cfg, &x, &taps);
        let mut prob = Problem::new(&cfg, &y, &x, &EstimatorOptions::new(2)).unwrap();
        let a = prob
            .amplitudes(&[taps[0].tau, taps[1].tau], &[taps[0].nu, taps[1].nu])
            .unwrap();
        assert!((a[0] - taps[0].gain).norm() < 1e-9 && (a[1] - taps[1].gain).norm() < 1e-9);
    }

    #[test]
    fn reconstruction_identity() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::Psk(4), 2).unwrap();
        let taps = three_taps();
        let prob = Problem::new(&cfg, &SymbolGrid::zeros(8, 16), &x, &EstimatorOptions::new(3)).unwrap();
        let chan = MultipathChannel::new(taps.clone()).unwrap();
        let direct = crate::signal::channel_coeffs_direct(&cfg, &chan).hadamard(&x).unwrap();
        assert!(prob.model(&taps).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn single_tap_recovery() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let region = SearchRegion::new(0.0, 400e-9, -2000.0, 2000.0).unwrap();
        let tap = Tap::new(c(-0.4, 0.9), 77.7e-9, 1234.5);
        let est = initial_estimate(&cfg, &observe(&cfg, &x, &[tap]), &x, &EstimatorOptions::new(1), &region).unwrap();
        let got = est.taps[0];
        assert!((got.tau - tap.tau).abs() < 1e-10);
        assert!((got.nu - tap.nu).abs() < 1e-2);
        assert!((got.gain - tap.gain).norm() / tap.gain.norm() < 1e-6);
        assert_eq!(est.residual_energy.len(), 2);
        assert!(est.residual_energy[1] < 1e-9 * est.residual_energy[0]);
    }

    #[test]
    fn three_taps_strongest_first() {
        let (cfg, region) = section_v(128);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let taps = three_taps();
        let y = observe(&cfg, &x, &taps);
        let est = initial_estimate(&cfg, &y, &x, &EstimatorOptions::new(3), &region).unwrap();
        assert_eq!(est.taps.len(), 3);
        for (got, truth) in est.taps.iter().zip(&taps) {
            assert!((got.tau - truth.tau).abs() < cfg.delay_resolution() / 2.0);
            assert!((got.nu - truth.nu).abs() < cfg.doppler_resolution() / 2.0);
        }
        let mags: Vec<f64> = est.taps.iter().map(|t| t.gain.norm()).collect();
        assert!(mags[0] >= mags[1] && mags[1] >= mags[2]);
        // successive residuals never grow
        for w in est.residual_energy.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * y.energy());
        }
    }

    #[test]
    fn refinement_converges_on_the_three_tap_geometry() {
        let (cfg, region) = section_v(128);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let taps = three_taps();
        let y = observe(&cfg, &x, &taps);
        let opts = EstimatorOptions::new(3).with_refinement(80);
        let (_, fin) = estimate(&cfg, &y, &x, &opts, &region).unwrap();
        // taps about one resolution cell apart: each sweep contracts the
        // error by roughly 0.75, so this takes tens of sweeps
        for (got, truth) in fin.taps.iter().zip(&taps) {
            assert!((got.tau - truth.tau).abs() < 0.5e-9);
            assert!((got.nu - truth.nu).abs() < 0.5);
            assert!((got.gain - truth.gain).norm() < 1e-3 * truth.gain.norm());
        }
    }

    #[test]
    fn gamma_drops_weak_taps() {
        let (cfg, region) = section_v(128);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let y = observe(&cfg, &x, &three_taps());
        let mut opts = EstimatorOptions::new(3);
        opts.gamma = Some(0.2);
        let est = initial_estimate(&cfg, &y, &x, &opts, &region).unwrap();
        assert_eq!(est.taps.len(), 2);
        assert_eq!(est.residual_energy.len(), 3);
    }

    #[test]
    fn refinement_cases() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let region = SearchRegion::new(0.0, 800e-9, -3000.0, 3000.0).unwrap();
        let taps = vec![
            Tap::new(c(1.0, 0.0), 100e-9, -1000.0),
            Tap::new(c(0.0, 0.5), 600e-9, 1500.0),
        ];
        let y = observe(&cfg, &x, &taps);
        let half = cfg.delay_resolution() / 2.0;
        let perturbed = EstimateSet {
            taps: vec![
                Tap::new(taps[0].gain, taps[0].tau + half, taps[0].nu),
                Tap::new(taps[1].gain, taps[1].tau - half, taps[1].nu),
            ],
            residual_energy: vec![y.energy()],
            refine_iters_used: 0,
            densified: false,
        };
        let opts = EstimatorOptions::new(2);
        assert_eq!(refine(&cfg, &y, &x, &perturbed, &opts, &region).unwrap(), perturbed);

        let refined = refine(&cfg, &y, &x, &perturbed, &opts.clone().with_refinement(3), &region).unwrap();
        assert_eq!(refined.refine_iters_used, 3);
        assert_eq!(refined.residual_energy.len(), 4);
        for (got, truth) in refined.taps.iter().zip(&taps) {
            assert!((got.tau - truth.tau).abs() < half);
        }
    }

    #[test]
    fn early_stop_never_worsens() {
        let (cfg, region) = section_v(64);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let chan = MultipathChannel::new(three_taps()).unwrap();
        let noise = NoiseSpec::from_snr_db(&cfg, 15.0, 4).unwrap();
        let y = apply_channel(&x, &crate::signal::channel_coeffs(&cfg, &chan), &noise).unwrap();
        let mut opts = EstimatorOptions::new(3).with_refinement(10);
        opts.early_stop_tol = Some(1e-6);
        let init = initial_estimate(&cfg, &y, &x, &opts, &region).unwrap();
        let fin = refine(&cfg, &y, &x, &init, &opts, &region).unwrap();
        let prob = Problem::new(&cfg, &y, &x, &opts).unwrap();
        assert!(prob.residual(&fin.taps).energy() <= prob.residual(&init.taps).energy());
    }

    #[test]
    fn domains_agree_for_unit_modulus_symbols() {
        let (cfg, region) = section_v(32);
        let x = generate_symbols(&cfg, Constellation::Psk(4), 7).unwrap();
        let y = observe(&cfg, &x, &three_taps());
        let a = initial_estimate(&cfg, &y, &x, &EstimatorOptions::new(3), &region).unwrap();
        let mut zf = EstimatorOptions::new(3);
        zf.domain = Domain::ZeroForcingH;
        let b = initial_estimate(&cfg, &y, &x, &zf, &region).unwrap();
        for (p, q) in a.taps.iter().zip(&b.taps) {
            assert!((p.tau - q.tau).abs() < 1e-15 && (p.nu - q.nu).abs() < 1e-9);
            assert!((p.gain - q.gain).norm() < 1e-9);
        }
    }

    #[test]
    fn brute_force_gram_gives_the_same_estimate() {
        let (cfg, region) = section_v(16);
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let y = observe(&cfg, &x, &three_taps());
        let a = initial_estimate(&cfg, &y, &x, &EstimatorOptions::new(3), &region).unwrap();
        let mut opts = EstimatorOptions::new(3);
        opts.gram = GramSource::BruteForce;
        let b = initial_estimate(&cfg, &y, &x, &opts, &region).unwrap();
        for (p, q) in a.taps.iter().zip(&b.taps) {
            assert!((p.gain - q.gain).norm() < 1e-9);
        }
    }

    #[test]
    fn colliding_taps_are_reported() {
        let cfg = small();
        let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
        let y = observe(&cfg, &x, &[Tap::new(c(1.0, 0.0), 100e-9, 0.0)]);
        let mut prob = Problem::new(&cfg, &y, &x, &EstimatorOptions::new(3)).unwrap();
        let res = prob.amplitudes(&[0.0, 100e-9, 100e-9], &[50.0, 0.0, 0.0]);
        assert!(
            matches!(res, Err(Error::SingularGram { taps: Some((1, 2)), .. })),
            "{res:?}"
        );
    }

    #[test]
    fn crlb_values() {
        let cfg = OfdmConfig::new(52, 512, 6.4e-6, 1.6e-6, &[]).unwrap();
        let b = crlb_single_tap(&cfg, 0.52, 0.01).unwrap();
        assert!((b.std_tau(&cfg) * 1e9 - 2.12).abs() < 0.01, "{}", b.std_tau(&cfg));
        assert!((b.std_nu(&cfg) - 4.2).abs() < 0.05, "{}", b.std_nu(&cfg));
        let d = crlb_single_tap(&cfg, 0.52, 0.02).unwrap();
        assert!((d.var_nu_td * 2.0 - b.var_nu_td).abs() < 1e-24);
        assert!((d.var_tau_over_t * 2.0 - b.var_tau_over_t).abs() < 1e-24);
        let swapped = OfdmConfig::new(512, 52, 6.4e-6, 1.6e-6, &[]).unwrap();
        let s = crlb_single_tap(&swapped, 0.52, 0.01).unwrap();
        assert_eq!((s.var_nu_td, s.var_tau_over_t), (b.var_tau_over_t, b.var_nu_td));
        assert!(crlb_single_tap(&cfg, 0.5, 0.0).is_err());
    }
}
