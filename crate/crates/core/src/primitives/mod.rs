//! Shared numeric building blocks.
//!
//! Every transform uses the unitary `1/sqrt(n)` convention so that energy is
//! preserved between time and frequency domains.

mod fft;
mod qpsk;

pub use fft::UnitaryFft;
pub use qpsk::{bits_to_symbols, qpsk_map, qpsk_slice, symbol_to_bits, QpskSymbol};

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{dim_err, Error, Result};

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid(DMatrix<Complex64>);

impl ComplexGrid {
    /// Wraps a matrix, rejecting empty shapes and non-finite entries.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return dim_err("grid must be non-empty");
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Contract("grid contains a non-finite entry".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return dim_err("identity size must be positive");
        }
        Ok(Self(DMatrix::identity(n, n)))
    }

    /// The all-ones matrix `1_{rows,cols}`.
    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return dim_err("ones matrix must be non-empty");
        }
        Ok(Self(DMatrix::from_element(rows, cols, Complex64::new(1.0, 0.0))))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }
}

/// Unitary DFT matrix, `W(a, b) = exp(-j 2 pi a b / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> Result<ComplexGrid> {
    if n == 0 {
        return dim_err("DFT size must be positive");
    }
    let scale = 1.0 / (n as f64).sqrt();
    let m = DMatrix::from_fn(n, n, |a, b| {
        // reduce the exponent modulo n before scaling to keep large phases exact
        let r = (a * b) % n;
        Complex64::from_polar(scale, -2.0 * PI * r as f64 / n as f64)
    });
    Ok(ComplexGrid(m))
}

/// Circulant matrix whose column `c` is `v` circularly shifted down by `c`.
pub fn circulant(v: &[Complex64]) -> Result<ComplexGrid> {
    let n = v.len();
    if n == 0 {
        return dim_err("circulant generator must be non-empty");
    }
    Ok(ComplexGrid(DMatrix::from_fn(n, n, |r, c| v[(r + n - c) % n])))
}

/// Kronecker product `a ⊗ b`.
pub fn kronecker(a: &ComplexGrid, b: &ComplexGrid) -> Result<ComplexGrid> {
    Ok(ComplexGrid(a.0.kronecker(&b.0)))
}

/// Block-diagonal matrix with the given blocks from top-left to bottom-right.
pub fn block_diag(blocks: &[&ComplexGrid]) -> Result<ComplexGrid> {
    if blocks.is_empty() {
        return dim_err("block_diag needs at least one block");
    }
    let rows: usize = blocks.iter().map(|b| b.rows()).sum();
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        m.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
        r0 += b.rows();
        c0 += b.cols();
    }
    Ok(ComplexGrid(m))
}

/// `delta`-fold repetition matrix `1_{delta,1} ⊗ I_m`.
pub fn repetition_matrix(delta: usize, m: usize) -> Result<ComplexGrid> {
    kronecker(&ComplexGrid::ones(delta, 1)?, &ComplexGrid::identity(m)?)
}

/// `sum |z|^2`.
pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
