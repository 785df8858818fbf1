use num_complex::Complex64;
use rand::Rng;

use super::WaveformParams;
use crate::error::{Error, Result};
use crate::primitives::QpskSymbol;
use crate::rng::{trial_rng, Stream};

/// Reads the pilot bins of a received spectrum and removes the transmit
/// pilot gain, so a flat unit channel returns the transmitted pilots.
pub fn extract_pilots(y_freq: &[Complex64], params: &WaveformParams) -> Result<Vec<Complex64>> {
    if y_freq.len() != params.grid_size() {
        return Err(Error::InvalidDimension(format!(
            "spectrum has {} bins, expected {}",
            y_freq.len(),
            params.grid_size()
        )));
    }
    params
        .pilot_bins
        .iter()
        .map(|&b| {
            y_freq
                .get(b)
                .map(|v| v / params.pilot_gain)
                .ok_or_else(|| Error::Index(format!("pilot bin {b} outside grid of {}", y_freq.len())))
        })
        .collect()
}

/// Fixed unit-modulus QPSK pilot values, reproducible from `seed`.
pub fn pilot_sequence(n_pilots: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = trial_rng(seed, Stream::Pilots, 0);
    (0..n_pilots)
        .map(|_| QpskSymbol::from_index(rng.random_range(0..4)).value())
        .collect()
}
