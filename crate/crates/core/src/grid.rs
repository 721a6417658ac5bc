//! `L × K` complex symbol grids.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An `L × K` complex matrix: entry `(l, k)` is the value on OFDM symbol `l`
/// and subcarrier `k`.
///
/// Storage is column-major with the symbol index running fastest, i.e. the
/// backing slice is exactly `vec(·)` of the grid: `(1,1), …, (L,1), (1,2), …`.
/// The same type holds transmit symbols `X`, channel coefficients `H`,
/// observations `Y`, noise `Z` and estimator residuals `E`.
///
/// [`SymbolGrid::entry`] takes 1-based `(l, k)`; `Index<(usize, usize)>` is
/// 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: Complex64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a grid from its `vec` ordering (symbol index fastest).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::config(alloc::format!(
                "grid data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a grid from a 0-based `f(l, k)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for k in 0..cols {
            for l in 0..rows {
                data.push(f(l, k));
            }
        }
        Self { rows, cols, data }
    }

    /// Number of OFDM symbols `L`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of subcarriers `K`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 1-based access.
    pub fn entry(&self, l: usize, k: usize) -> Complex64 {
        assert!(l >= 1 && k >= 1, "SymbolGrid::entry is 1-based");
        self[(l - 1, k - 1)]
    }

    /// The `vec(·)` view of the grid.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Column `k` (0-based), i.e. all `L` symbols of one subcarrier.
    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn same_shape(&self, other: &SymbolGrid) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected_rows: self.rows,
                expected_cols: self.cols,
                rows: other.rows,
                cols: other.cols,
            });
        }
        Ok(())
    }

    pub fn hadamard(&self, other: &SymbolGrid) -> Result<SymbolGrid> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(SymbolGrid {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self ⊙ conj(other)`.
    pub fn hadamard_conj(&self, other: &SymbolGrid) -> Result<SymbolGrid> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).collect();
        Ok(SymbolGrid {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &SymbolGrid) -> Result<SymbolGrid> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(SymbolGrid {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, other: &SymbolGrid) -> Result<SymbolGrid> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(SymbolGrid {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Squared Frobenius norm.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &SymbolGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for SymbolGrid {
    type Output = Complex64;

    fn index(&self, (l, k): (usize, usize)) -> &Complex64 {
        assert!(l < self.rows && k < self.cols);
        &self.data[k * self.rows + l]
    }
}

impl IndexMut<(usize, usize)> for SymbolGrid {
    fn index_mut(&mut self, (l, k): (usize, usize)) -> &mut Complex64 {
        assert!(l < self.rows && k < self.cols);
        &mut self.data[k * self.rows + l]
    }
}
