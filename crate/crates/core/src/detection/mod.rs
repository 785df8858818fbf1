//! Zero-forcing equalization, QPSK decisions and the GFDM interference
//! cancellation receiver.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::primitives::{qpsk_slice, QpskSymbol};
use crate::waveforms::{FrameSymbols, GfdmModem, WaveformParams};

/// Channel estimates below this magnitude are regularized before division.
pub const ZF_FLOOR: f64 = 1e-8;

/// `Y[k] / H[k]` per bin. Near-zero estimates are pushed out to the floor
/// along their own phase.
pub fn zf_equalize(y_freq: &[Complex64], h_full: &[Complex64]) -> Result<Vec<Complex64>> {
    if y_freq.len() != h_full.len() {
        return Err(Error::InvalidDimension(format!(
            "{} received bins for {} channel bins",
            y_freq.len(),
            h_full.len()
        )));
    }
    let mut floored = 0usize;
    let out = y_freq
        .iter()
        .zip(h_full)
        .map(|(y, h)| {
            let mag = h.norm();
            if mag < ZF_FLOOR {
                floored += 1;
                let phase = if mag > 0.0 { h / mag } else { Complex64::new(1.0, 0.0) };
                y / (h + phase * ZF_FLOOR)
            } else {
                y / h
            }
        })
        .collect();
    if floored > 0 {
        log::warn!("zero-forcing: {floored} bin(s) in deep fade regularized");
    }
    Ok(out)
}

fn slice_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| qpsk_slice(*z).value()).collect()
}

/// Iteration state of the interference canceller.
#[derive(Debug, Clone)]
pub struct IcState {
    /// Window values of every subcarrier before cancellation, `M*delta` each.
    pub y0: Vec<Vec<Complex64>>,
    /// `K x M` decisions; pilot subcarrier rows stay zero.
    pub d_hat: DMatrix<Complex64>,
    pub j: usize,
    pub j_max: usize,
}

impl IcState {
    /// Matched-filter detection of every data subcarrier (iteration 0).
    pub fn initial(spectrum: &[Complex64], modem: &GfdmModem, j_max: usize) -> Result<Self> {
        let p = modem.params();
        if spectrum.len() != p.n() {
            return Err(Error::InvalidDimension(format!(
                "expected {} bins, got {}",
                p.n(),
                spectrum.len()
            )));
        }
        let y0: Vec<Vec<Complex64>> = (0..p.k).map(|k| modem.window_values(spectrum, k)).collect();
        let mut d_hat = DMatrix::zeros(p.k, p.m);
        for k in p.data_subcarriers() {
            let d = slice_all(&modem.despread(&modem.matched_window(&y0[k])));
            d_hat.row_mut(k).iter_mut().zip(d).for_each(|(o, v)| *o = v);
        }
        Ok(Self { y0, d_hat, j: 0, j_max })
    }

    /// One Jacobi sweep: every subcarrier subtracts its neighbours'
    /// interference rebuilt from the previous iteration's decisions.
    pub fn sweep(&mut self, modem: &GfdmModem) -> Result<()> {
        let prev = FrameSymbols {
            data: self.d_hat.clone(),
            pilots: DMatrix::zeros(self.d_hat.nrows(), self.d_hat.ncols()),
        };
        self.d_hat = cancel_and_detect(&self.y0, &prev, modem)?;
        self.j += 1;
        Ok(())
    }
}

/// Rebuilds neighbour interference from `prev` and re-detects each data
/// subcarrier from its cancelled window,
/// `y_k = y_k^(0) - (G S W_M)(d_{k-1}, d_{k+1})` on the window of `k`.
pub fn cancel_and_detect(y0: &[Vec<Complex64>], prev: &FrameSymbols, modem: &GfdmModem) -> Result<DMatrix<Complex64>> {
    let p = modem.params();
    if p.delta != 2 {
        return Err(Error::Parameter(format!(
            "interference cancellation needs delta = 2, got {}",
            p.delta
        )));
    }
    let rebuilt = modem.modulate_spectrum(prev)?;
    let mut out = DMatrix::zeros(p.k, p.m);
    for k in p.data_subcarriers() {
        let own = modem.subcarrier_window(&modem.subcarrier_vector(prev, k));
        let total = modem.window_values(&rebuilt, k);
        let cleaned: Vec<Complex64> = y0[k]
            .iter()
            .zip(total.iter().zip(&own))
            .map(|(y, (t, o))| y - (t - o))
            .collect();
        let d = slice_all(&modem.despread(&modem.matched_window(&cleaned)));
        out.row_mut(k).iter_mut().zip(d).for_each(|(o, v)| *o = v);
    }
    Ok(out)
}

/// Matched-filter detection followed by `j_max` cancellation sweeps on an
/// equalized `N`-bin spectrum. Returns `K x M` QPSK decisions with zero rows on
/// pilot subcarriers.
pub fn ic_receive(spectrum: &[Complex64], modem: &GfdmModem, j_max: usize) -> Result<DMatrix<Complex64>> {
    let mut state = IcState::initial(spectrum, modem, j_max)?;
    while state.j < state.j_max {
        state.sweep(modem)?;
    }
    Ok(state.d_hat)
}

/// Per-bin slicing of equalized OFDM spectra (`K x M`); pilot rows stay zero.
pub fn ofdm_detect(spectra: &DMatrix<Complex64>, params: &WaveformParams) -> Result<DMatrix<Complex64>> {
    if spectra.shape() != (params.k, params.m) {
        return Err(Error::InvalidDimension(format!(
            "spectra are {:?}, expected {}x{}",
            spectra.shape(),
            params.k,
            params.m
        )));
    }
    Ok(DMatrix::from_fn(params.k, params.m, |k, m| {
        if params.is_pilot_subcarrier(k) {
            Complex64::default()
        } else {
            qpsk_slice(spectra[(k, m)]).value()
        }
    }))
}

/// Bit errors between decisions and transmitted symbols on data subcarriers,
/// as `(errors, bits)`.
pub fn count_bit_errors(
    decided: &DMatrix<Complex64>,
    truth: &DMatrix<Complex64>,
    params: &WaveformParams,
) -> Result<(u64, u64)> {
    if decided.shape() != truth.shape() || decided.nrows() != params.k {
        return Err(Error::InvalidDimension(format!(
            "decisions {:?} vs truth {:?}",
            decided.shape(),
            truth.shape()
        )));
    }
    let (mut errors, mut bits) = (0u64, 0u64);
    for k in params.data_subcarriers() {
        for m in 0..decided.ncols() {
            let a = qpsk_slice(decided[(k, m)]);
            let b = qpsk_slice(truth[(k, m)]);
            errors += (a.index() ^ b.index()).count_ones() as u64;
            bits += 2;
        }
    }
    Ok((errors, bits))
}

/// Decision as an alphabet symbol; convenience for callers holding raw values.
pub fn decide(z: Complex64) -> QpskSymbol {
    qpsk_slice(z)
}
