//! Small numeric helpers shared across modules.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub(crate) const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Unnormalised sinc, `sin(x)/x`, with the removable singularity handled by
/// its Taylor series below `|x| < 1e-8`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `e^{j·2π·cycles}`.
#[inline]
pub(crate) fn cis_cycles(cycles: f64) -> Complex64 {
    Complex64::cis(TWO_PI * cycles)
}
