//! Tapped-delay-line Rayleigh channels, AWGN and pilot-domain covariances.
//!
//! A channel is static over one frame (one GFDM block, or all `M` OFDM
//! symbols). With the cyclic prefix at least as long as the delay spread, its
//! effect on each CP-stripped block is a per-bin multiplication by the
//! frequency response, which is how [`apply_channel`] realizes it.

mod covariance;

pub use covariance::{approx_pilot_covariance, true_pilot_covariance, CovarianceKind, CovarianceMatrix};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::primitives::UnitaryFft;
use crate::rng::{trial_rng, Stream};

/// How fractional path delays are turned into a discrete channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayModel {
    /// Each path is a unit-energy sinc interpolator truncated to the CP taps
    /// `0..L_cp`, i.e. a causal FIR sampled from a band-limited continuous
    /// channel.
    #[default]
    BandLimited,
    /// Each path contributes `exp(-j 2 pi f tau)` on the block's DFT grid. For
    /// non-integer `tau` this is a periodic sinc spanning the whole block.
    ExactFrequency,
}

/// Statistical description of a multipath channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Path delays in samples, strictly increasing.
    pub delays: Vec<f64>,
    /// Average path powers, normalized to sum to one.
    pub powers: Vec<f64>,
    pub cp_len: usize,
    #[serde(default)]
    pub delay_model: DelayModel,
    /// `false` fixes every gain to `sqrt(P_l)`.
    #[serde(default = "default_true")]
    pub fading: bool,
}

fn default_true() -> bool {
    true
}

impl ChannelSpec {
    /// Validates and normalizes a power delay profile.
    pub fn new(delays: Vec<f64>, powers: Vec<f64>, cp_len: usize) -> Result<Self> {
        let mut spec = Self {
            delays,
            powers,
            cp_len,
            delay_model: DelayModel::default(),
            fading: true,
        };
        spec.normalize()?;
        Ok(spec)
    }

    /// Four-path profile `(1, 0.5, 0.25, 0.125)` at delays `(0, 2.7, 3.1, 4.9)`.
    pub fn reference(cp_len: usize) -> Result<Self> {
        Self::new(vec![0.0, 2.7, 3.1, 4.9], vec![1.0, 0.5, 0.25, 0.125], cp_len)
    }

    /// Unit, non-fading, single-path channel.
    pub fn awgn(cp_len: usize) -> Self {
        Self {
            delays: vec![0.0],
            powers: vec![1.0],
            cp_len,
            delay_model: DelayModel::default(),
            fading: false,
        }
    }

    pub fn with_delay_model(mut self, model: DelayModel) -> Self {
        self.delay_model = model;
        self
    }

    pub fn with_fading(mut self, fading: bool) -> Self {
        self.fading = fading;
        self
    }

    pub fn n_taps(&self) -> usize {
        self.delays.len()
    }

    pub fn max_delay(&self) -> f64 {
        self.delays.last().copied().unwrap_or(0.0)
    }

    /// Checks the invariants and rescales powers to unit sum.
    pub fn normalize(&mut self) -> Result<()> {
        if self.delays.is_empty() || self.delays.len() != self.powers.len() {
            return Err(Error::Parameter(format!(
                "{} delays vs {} powers",
                self.delays.len(),
                self.powers.len()
            )));
        }
        if self.delays.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Parameter("delays must be finite and non-negative".into()));
        }
        if self.delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("delays must be strictly increasing".into()));
        }
        if self.max_delay() >= self.cp_len as f64 {
            return Err(Error::ModelViolation(format!(
                "delay {} not shorter than CP of {} samples",
                self.max_delay(),
                self.cp_len
            )));
        }
        if self.powers.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::Parameter("powers must be positive".into()));
        }
        let total: f64 = self.powers.iter().sum();
        self.powers.iter_mut().for_each(|p| *p /= total);
        Ok(())
    }

    /// Discrete taps `0..L_cp` of path `l` under [`DelayModel::BandLimited`].
    pub fn tap_shape(&self, l: usize) -> Vec<f64> {
        let tau = self.delays[l];
        let mut s: Vec<f64> = (0..self.cp_len).map(|n| sinc(n as f64 - tau)).collect();
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.iter_mut().for_each(|x| *x /= norm);
        s
    }

    /// Response of path `l` at normalized frequency `f` (cycles per sample).
    pub fn path_response(&self, l: usize, f: f64) -> Complex64 {
        match self.delay_model {
            DelayModel::ExactFrequency => Complex64::from_polar(1.0, -2.0 * PI * f * self.delays[l]),
            DelayModel::BandLimited => self
                .tap_shape(l)
                .iter()
                .enumerate()
                .map(|(n, s)| Complex64::from_polar(*s, -2.0 * PI * f * n as f64))
                .sum(),
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// One drawn channel and its response on a DFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Per-path complex gains `h_l`.
    pub gains: Vec<Complex64>,
    /// Equivalent discrete taps at delays `0..L_cp`, for the band-limited model.
    pub taps: Option<Vec<Complex64>>,
    pub freq_response: Vec<Complex64>,
    pub grid_size: usize,
    pub max_delay: f64,
}

impl ChannelRealization {
    /// Builds the realization for given path gains.
    pub fn from_gains(spec: &ChannelSpec, gains: Vec<Complex64>, grid_size: usize) -> Result<Self> {
        if gains.len() != spec.n_taps() {
            return Err(Error::InvalidDimension(format!(
                "{} gains for {} paths",
                gains.len(),
                spec.n_taps()
            )));
        }
        if grid_size == 0 {
            return Err(Error::InvalidDimension("empty frequency grid".into()));
        }
        let (taps, freq_response) = match spec.delay_model {
            DelayModel::ExactFrequency => {
                let h = (0..grid_size)
                    .map(|k| {
                        gains
                            .iter()
                            .zip(&spec.delays)
                            .map(|(g, tau)| {
                                g * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * tau / grid_size as f64)
                            })
                            .sum()
                    })
                    .collect();
                (None, h)
            }
            DelayModel::BandLimited => {
                let mut taps = vec![Complex64::default(); spec.cp_len];
                for (l, g) in gains.iter().enumerate() {
                    for (t, s) in taps.iter_mut().zip(spec.tap_shape(l)) {
                        *t += g * s;
                    }
                }
                if spec.cp_len > grid_size {
                    return Err(Error::ModelViolation("CP longer than the block".into()));
                }
                let mut padded = taps.clone();
                padded.resize(grid_size, Complex64::default());
                let fft = UnitaryFft::new(grid_size);
                let scale = (grid_size as f64).sqrt();
                let h = fft.forward(&padded).into_iter().map(|z| z * scale).collect();
                (Some(taps), h)
            }
        };
        Ok(Self {
            gains,
            taps,
            freq_response,
            grid_size,
            max_delay: spec.max_delay(),
        })
    }
}

/// Draws a realization from the stream keyed by `seed`.
pub fn draw_channel(spec: &ChannelSpec, grid_size: usize, seed: u64) -> Result<ChannelRealization> {
    draw_channel_with(spec, grid_size, &mut trial_rng(seed, Stream::Channel, 0))
}

/// Draws `h_l ~ CN(0, P_l)` from `rng` (or `sqrt(P_l)` without fading).
pub fn draw_channel_with(spec: &ChannelSpec, grid_size: usize, rng: &mut ChaCha8Rng) -> Result<ChannelRealization> {
    let gains = spec
        .powers
        .iter()
        .map(|&p| {
            if spec.fading {
                complex_normal(rng) * p.sqrt()
            } else {
                Complex64::new(p.sqrt(), 0.0)
            }
        })
        .collect();
    ChannelRealization::from_gains(spec, gains, grid_size)
}

/// Unit-variance circular complex Gaussian sample.
pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Passes a CP-prefixed signal (one or more blocks of `grid_size + cp_len`
/// samples) through the channel. Each output block carries a fresh CP so the
/// result has the input's layout.
pub fn apply_channel(x_cp: &[Complex64], real: &ChannelRealization, cp_len: usize) -> Result<Vec<Complex64>> {
    if real.max_delay >= cp_len as f64 {
        return Err(Error::ModelViolation(format!(
            "delay {} not shorter than CP of {cp_len} samples",
            real.max_delay
        )));
    }
    let block = real.grid_size + cp_len;
    if x_cp.is_empty() || !x_cp.len().is_multiple_of(block) {
        return Err(Error::InvalidDimension(format!(
            "signal of {} samples is not a whole number of {block}-sample blocks",
            x_cp.len()
        )));
    }
    let fft = UnitaryFft::new(real.grid_size);
    let mut out = Vec::with_capacity(x_cp.len());
    for chunk in x_cp.chunks_exact(block) {
        let mut buf = chunk[cp_len..].to_vec();
        fft.forward_inplace(&mut buf);
        buf.iter_mut().zip(&real.freq_response).for_each(|(y, h)| *y *= h);
        fft.inverse_inplace(&mut buf);
        out.extend_from_slice(&buf[real.grid_size - cp_len..]);
        out.extend_from_slice(&buf);
    }
    Ok(out)
}

/// Adds `CN(0, noise_variance)` samples drawn from the stream keyed by `seed`.
pub fn add_awgn(y: &[Complex64], noise_variance: f64, seed: u64) -> Result<Vec<Complex64>> {
    add_awgn_with(y, noise_variance, &mut trial_rng(seed, Stream::Noise, 0))
}

/// Adds `sigma * w` with `w` unit complex Gaussians drawn from `rng`.
pub fn add_awgn_with(y: &[Complex64], noise_variance: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    if !noise_variance.is_finite() || noise_variance < 0.0 {
        return Err(Error::Parameter(format!(
            "noise variance {noise_variance} must be finite and >= 0"
        )));
    }
    let sigma = noise_variance.sqrt();
    Ok(y.iter().map(|v| v + complex_normal(rng) * sigma).collect())
}
