//! Least-squares amplitudes from the Gram matrix.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Condition number (1-norm) above which `R` is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Pair `(i, j)` with the largest normalised coherence `|R_ij|/√(R_ii R_jj)`.
fn most_coherent_pair(r: &DMatrix<Complex64>) -> Option<(usize, usize)> {
    let p = r.nrows();
    let mut best: Option<((usize, usize), f64)> = None;
    for i in 0..p {
        for j in i + 1..p {
            let d = (r[(i, i)].re * r[(j, j)].re).abs().sqrt();
            let c = if d > 0.0 { r[(i, j)].norm() / d } else { f64::INFINITY };
            if best.map_or(true, |(_, b)| c > b) {
                best = Some(((i, j), c));
            }
        }
    }
    best.map(|(pair, _)| pair)
}

/// Solves `R â = w` by LU decomposition with partial pivoting.
///
/// Fails with [`Error::SingularGram`] when the 1-norm condition number of
/// `R` exceeds [`MAX_CONDITION`]; the error names the most coherent tap pair.
pub fn ls_amplitudes(r: &DMatrix<Complex64>, w: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = w.len();
    if r.nrows() != p || r.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected_rows: p,
            expected_cols: p,
            rows: r.nrows(),
            cols: r.ncols(),
        });
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let singular = |condition: f64| Error::SingularGram {
        taps: most_coherent_pair(r),
        condition,
    };
    let lu = r.clone().lu();
    let inv = lu.try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = norm1(r) * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(singular(condition));
    }
    let rhs = DVector::from_column_slice(w);
    let a = lu.solve(&rhs).ok_or_else(|| singular(condition))?;
    Ok(a.iter().copied().collect())
}
