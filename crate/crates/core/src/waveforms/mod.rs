//! OFDM and GFDM modulation with interference-free pilot framing.
//!
//! GFDM is implemented in the frequency domain: each subcarrier's `M`
//! symbols are DFT-spread, repeated `delta` times, weighted by the prototype
//! filter's frequency response and placed in a window of `M * delta` bins
//! centred on bin `k * M` of the `N = M * K` grid.

mod cp;
mod filter;
mod gfdm;
mod ofdm;
mod pilots;

pub use cp::{add_cp, remove_cp};
pub use filter::{raised_cosine_spectrum, rrc_prototype, rrc_pulse, PrototypeFilter};
pub use gfdm::{gfdm_demodulate, gfdm_modulate_direct, FrameSymbols, GfdmFrame, GfdmModem};
pub use ofdm::{ofdm_demodulate, ofdm_modulate, OfdmModem};
pub use pilots::{extract_pilots, pilot_sequence};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multicarrier waveform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Ofdm,
    Gfdm,
}

impl System {
    pub fn label(self) -> &'static str {
        match self {
            System::Ofdm => "ofdm",
            System::Gfdm => "gfdm",
        }
    }
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ofdm" => Ok(System::Ofdm),
            "gfdm" => Ok(System::Gfdm),
            other => Err(Error::Config(format!("unknown system '{other}'"))),
        }
    }
}

/// Static dimensions and pilot layout of one system.
///
/// Every `pilot_spacing`-th subcarrier (starting at 0) is a pilot subcarrier
/// carrying exactly one pilot. In GFDM the pilot sits on the subcarrier's
/// centre bin `k * M` of the `N`-grid; in OFDM on bin `k` of the `K`-grid in
/// every OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformParams {
    pub system: System,
    /// Subcarriers per (sub)symbol.
    pub k: usize,
    /// GFDM subsymbols per block, or OFDM symbols per frame.
    pub m: usize,
    /// Frequency support of the prototype filter in subcarrier widths.
    pub delta: usize,
    pub alpha: f64,
    pub pilot_spacing: usize,
    pub cp_len: usize,
    /// Pilot amplitude scaling; makes every pilot unit-energy after filtering.
    pub pilot_lambda: f64,
    /// Received pilot gain on a unit flat channel, `lambda * G(0)` (GFDM) or 1.
    pub pilot_gain: Complex64,
    /// Indices on the `N`-grid (GFDM) or `K`-grid (OFDM).
    pub pilot_bins: Vec<usize>,
}

impl WaveformParams {
    /// Builds and validates a parameter set with `delta = 2`.
    pub fn new(system: System, k: usize, m: usize, alpha: f64, pilot_spacing: usize, cp_len: usize) -> Result<Self> {
        Self::with_delta(system, k, m, 2, alpha, pilot_spacing, cp_len)
    }

    pub fn with_delta(
        system: System,
        k: usize,
        m: usize,
        delta: usize,
        alpha: f64,
        pilot_spacing: usize,
        cp_len: usize,
    ) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::Parameter("K and M must be positive".into()));
        }
        if pilot_spacing == 0 || !k.is_multiple_of(pilot_spacing) {
            return Err(Error::Parameter(format!(
                "pilot spacing {pilot_spacing} must divide K={k}"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Parameter(format!("roll-off {alpha} outside (0, 1]")));
        }
        if system == System::Gfdm {
            if delta == 0 || delta > m {
                return Err(Error::Parameter(format!(
                    "delta={delta} must satisfy 1 <= delta <= M={m}"
                )));
            }
            if !k.is_multiple_of(delta) {
                return Err(Error::Parameter(format!("delta={delta} must divide K={k}")));
            }
            if (delta as f64) < 1.0 + alpha {
                return Err(Error::Parameter(format!(
                    "delta={delta} cannot hold an RRC with roll-off {alpha}"
                )));
            }
        }
        let n_p = k / pilot_spacing;
        let stride = match system {
            System::Gfdm => m,
            System::Ofdm => 1,
        };
        let pilot_bins = (0..n_p).map(|q| q * pilot_spacing * stride).collect();
        let mut params = Self {
            system,
            k,
            m,
            delta,
            alpha,
            pilot_spacing,
            cp_len,
            pilot_lambda: 1.0,
            pilot_gain: Complex64::new(1.0, 0.0),
            pilot_bins,
        };
        if system == System::Gfdm {
            let filter = rrc_prototype(&params)?;
            let g0 = filter.response()[0];
            params.pilot_lambda = 1.0 / g0.norm();
            params.pilot_gain = g0 * params.pilot_lambda;
        }
        Ok(params)
    }

    /// Block length `N = M * K`.
    pub fn n(&self) -> usize {
        self.m * self.k
    }

    /// Number of pilots per (sub)symbol, `K / p_s`.
    pub fn n_pilots(&self) -> usize {
        self.k / self.pilot_spacing
    }

    /// Size of the grid the channel is equalized on.
    pub fn grid_size(&self) -> usize {
        match self.system {
            System::Gfdm => self.n(),
            System::Ofdm => self.k,
        }
    }

    pub fn is_pilot_subcarrier(&self, k: usize) -> bool {
        k.is_multiple_of(self.pilot_spacing)
    }

    pub fn data_subcarriers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&k| !self.is_pilot_subcarrier(k))
    }

    /// Samples per transmitted frame including every cyclic prefix.
    pub fn frame_len(&self) -> usize {
        match self.system {
            System::Gfdm => self.n() + self.cp_len,
            System::Ofdm => self.m * (self.k + self.cp_len),
        }
    }
}
