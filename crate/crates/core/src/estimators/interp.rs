use num_complex::Complex64;

use super::basis::BemDesign;
use super::bem::apply;
use super::EstimateResult;
use crate::error::{Error, Result};
use crate::primitives::UnitaryFft;
use crate::waveforms::WaveformParams;

/// Delay-domain interpolation from uniformly spaced pilots to the full grid.
///
/// The `N_p` pilots sample the response at `f = q / N_p`, so an `N_p`-point
/// inverse DFT yields delay taps `0..N_p`. The first `taps` of them are kept
/// and evaluated on every bin `b / G` of the full grid.
#[derive(Debug, Clone)]
pub struct DelayInterpolator {
    taps: usize,
    pilot_fft: UnitaryFft,
    grid_fft: UnitaryFft,
}

impl DelayInterpolator {
    pub fn new(params: &WaveformParams, taps: usize) -> Result<Self> {
        let n_p = params.n_pilots();
        let g = params.grid_size();
        if taps == 0 || taps > n_p {
            return Err(Error::Parameter(format!(
                "interpolation taps {taps} must lie in 1..={n_p}"
            )));
        }
        if params.pilot_spacing * n_p != params.k {
            return Err(Error::Parameter("pilots must cover the band uniformly".into()));
        }
        Ok(Self {
            taps,
            pilot_fft: UnitaryFft::new(n_p),
            grid_fft: UnitaryFft::new(g),
        })
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn interpolate(&self, h_pilot: &[Complex64]) -> Result<Vec<Complex64>> {
        let n_p = self.pilot_fft.len();
        if h_pilot.len() != n_p {
            return Err(Error::InvalidDimension(format!(
                "{} pilot values, expected {n_p}",
                h_pilot.len()
            )));
        }
        let g = self.grid_fft.len();
        let delay = self.pilot_fft.inverse(h_pilot);
        let scale = (g as f64 / n_p as f64).sqrt();
        let mut buf = vec![Complex64::default(); g];
        for (b, c) in buf.iter_mut().zip(&delay[..self.taps]) {
            *b = c * scale;
        }
        self.grid_fft.forward_inplace(&mut buf);
        Ok(buf)
    }
}

/// Full-grid response of an estimate: `B_full a` for BEM kinds, delay-domain
/// interpolation with `interp_taps` taps otherwise.
pub fn interpolate_full_grid(
    result: &EstimateResult,
    params: &WaveformParams,
    design: Option<&BemDesign>,
    interp_taps: usize,
) -> Result<Vec<Complex64>> {
    match (&result.a_hat, design) {
        (Some(a), Some(d)) => {
            if a.len() != d.n_a() {
                return Err(Error::InvalidDimension(format!(
                    "{} coefficients for {} basis functions",
                    a.len(),
                    d.n_a()
                )));
            }
            Ok(apply(&d.full, a))
        }
        (Some(_), None) => Err(Error::Contract("BEM estimate needs its basis design".into())),
        (None, _) => DelayInterpolator::new(params, interp_taps)?.interpolate(&result.h_pilot),
    }
}
