use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{add_cp, remove_cp, System, WaveformParams};
use crate::error::{Error, Result};
use crate::primitives::UnitaryFft;

/// `x = W_K^H d`, one OFDM symbol without CP.
pub fn ofdm_modulate(d: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    if d.len() != k || k == 0 {
        return Err(Error::InvalidDimension(format!(
            "expected {k} symbols, got {}",
            d.len()
        )));
    }
    Ok(UnitaryFft::new(k).inverse(d))
}

/// `W_K y`, one OFDM symbol without CP.
pub fn ofdm_demodulate(y: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    if y.len() != k || k == 0 {
        return Err(Error::InvalidDimension(format!(
            "expected {k} samples, got {}",
            y.len()
        )));
    }
    Ok(UnitaryFft::new(k).forward(y))
}

/// Frame of `M` OFDM symbols, each with its own cyclic prefix.
#[derive(Debug, Clone)]
pub struct OfdmModem {
    params: WaveformParams,
    fft: UnitaryFft,
}

impl OfdmModem {
    pub fn new(params: &WaveformParams) -> Result<Self> {
        if params.system != System::Ofdm {
            return Err(Error::Parameter("OFDM modem needs OFDM parameters".into()));
        }
        Ok(Self {
            params: params.clone(),
            fft: UnitaryFft::new(params.k),
        })
    }

    pub fn params(&self) -> &WaveformParams {
        &self.params
    }

    pub fn fft(&self) -> &UnitaryFft {
        &self.fft
    }

    /// Column `m` of `symbols` (`K x M`) is the spectrum of OFDM symbol `m`.
    pub fn modulate_frame(&self, symbols: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
        let p = &self.params;
        if symbols.nrows() != p.k || symbols.ncols() != p.m {
            return Err(Error::InvalidDimension(format!(
                "OFDM frame is {}x{}, expected {}x{}",
                symbols.nrows(),
                symbols.ncols(),
                p.k,
                p.m
            )));
        }
        let mut out = Vec::with_capacity(p.frame_len());
        for col in symbols.column_iter() {
            let spec: Vec<Complex64> = col.iter().copied().collect();
            out.extend(add_cp(&self.fft.inverse(&spec), p.cp_len)?);
        }
        Ok(out)
    }

    /// Strips every CP and returns the `K x M` received spectra.
    pub fn demodulate_frame(&self, y: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let p = &self.params;
        if y.len() != p.frame_len() {
            return Err(Error::InvalidDimension(format!(
                "expected {} samples, got {}",
                p.frame_len(),
                y.len()
            )));
        }
        let mut out = DMatrix::zeros(p.k, p.m);
        for (m, chunk) in y.chunks_exact(p.k + p.cp_len).enumerate() {
            let spec = self.fft.forward(&remove_cp(chunk, p.cp_len)?);
            out.column_mut(m).copy_from_slice(&spec);
        }
        Ok(out)
    }
}
