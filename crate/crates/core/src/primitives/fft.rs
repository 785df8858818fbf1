use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT pair of a fixed size with unitary scaling.
#[derive(Clone)]
pub struct UnitaryFft {
    len: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for UnitaryFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryFft").field("len", &self.len).finish()
    }
}

impl UnitaryFft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let mut planner = FftPlanner::new();
        Self {
            len,
            scale: 1.0 / (len as f64).sqrt(),
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place `W x`.
    pub fn forward_inplace(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }

    /// In-place `W^H x`.
    pub fn inverse_inplace(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut v = x.to_vec();
        self.forward_inplace(&mut v);
        v
    }

    pub fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut v = x.to_vec();
        self.inverse_inplace(&mut v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::dft_matrix;

    #[test]
    fn matches_dense_dft() {
        let n = 12;
        let w = dft_matrix(n).unwrap();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let fast = UnitaryFft::new(n).forward(&x);
        for a in 0..n {
            let dense: Complex64 = (0..n).map(|b| w.get(a, b) * x[b]).sum();
            assert!((dense - fast[a]).norm() < 1e-10);
        }
        let back = UnitaryFft::new(n).inverse(&fast);
        for (p, q) in back.iter().zip(&x) {
            assert!((p - q).norm() < 1e-12);
        }
    }
}
