//! Cramér–Rao bound for a single tap.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::signal::OfdmConfig;

use core::f64::consts::PI;

/// Lower bounds on the variance of the normalised single-tap estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crlb {
    /// Bound on `var[ν̂ T_d]`.
    pub var_nu_td: f64,
    /// Bound on `var[τ̂ / T]`.
    pub var_tau_over_t: f64,
}

impl Crlb {
    /// Standard deviation of `τ̂` in seconds.
    pub fn std_tau(&self, cfg: &OfdmConfig) -> f64 {
        self.var_tau_over_t.sqrt() * cfg.t()
    }

    /// Standard deviation of `ν̂` in Hz.
    pub fn std_nu(&self, cfg: &OfdmConfig) -> f64 {
        self.var_nu_td.sqrt() / cfg.t_d()
    }
}

/// `var[ν̂T_d] ≥ (1/4π²)·6/(KL(L²−1))·σ²/|a|²` and
/// `var[τ̂/T] ≥ (1/4π²)·6/(KL(K²−1))·σ²/|a|²`.
pub fn crlb_single_tap(cfg: &OfdmConfig, sigma2: f64, a_mag2: f64) -> Result<Crlb> {
    if a_mag2.is_nan() || a_mag2 <= 0.0 {
        return Err(Error::config("tap power must be positive"));
    }
    if sigma2.is_nan() || sigma2 < 0.0 {
        return Err(Error::config("noise variance must be non-negative"));
    }
    if cfg.k() < 2 || cfg.l() < 2 {
        return Err(Error::config("the bound needs K, L >= 2"));
    }
    let k = cfg.k() as f64;
    let l = cfg.l() as f64;
    let base = 6.0 / (4.0 * PI * PI * k * l) * sigma2 / a_mag2;
    Ok(Crlb {
        var_nu_td: base / (l * l - 1.0),
        var_tau_over_t: base / (k * k - 1.0),
    })
}
