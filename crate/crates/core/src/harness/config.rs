use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::channel::{ChannelSpec, DelayModel};
use crate::error::{Error, Result};
use crate::estimators::{BasisKind, EstimatorKind};
use crate::waveforms::{System, WaveformParams};

/// Multipath profile; the CP length comes from [`SimConfig::cp_len`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelProfile {
    pub delays: Vec<f64>,
    pub powers: Vec<f64>,
    #[serde(default)]
    pub delay_model: DelayModel,
    #[serde(default = "yes")]
    pub fading: bool,
}

fn yes() -> bool {
    true
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self {
            delays: vec![0.0, 2.7, 3.1, 4.9],
            powers: vec![1.0, 0.5, 0.25, 0.125],
            delay_model: DelayModel::default(),
            fading: true,
        }
    }
}

impl ChannelProfile {
    /// Single unit path without fading.
    pub fn awgn() -> Self {
        Self {
            delays: vec![0.0],
            powers: vec![1.0],
            delay_model: DelayModel::default(),
            fading: false,
        }
    }
}

/// Everything that determines a sweep's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub system: System,
    pub k: usize,
    pub m: usize,
    pub pilot_spacing: usize,
    pub cp_len: usize,
    pub alpha: f64,
    pub delta: usize,
    pub n_a: usize,
    /// Interference-cancellation sweeps.
    pub j_max: usize,
    pub basis: BasisKind,
    pub estimators: Vec<EstimatorKind>,
    pub ebn0_grid_db: Vec<f64>,
    /// Trials per cell (the cap when early stopping).
    pub trials: u64,
    /// BER cells never stop before this many trials.
    pub min_trials: u64,
    /// BER cells stop once this many bit errors are counted.
    pub target_errors: u64,
    /// Trials evaluated between stopping checks.
    pub batch_size: u64,
    pub master_seed: u64,
    pub channel: ChannelProfile,
    /// Delay taps kept when interpolating LS/LMMSE pilots to the full grid.
    /// `None` keeps all `K / pilot_spacing` taps (plain trigonometric
    /// interpolation); `Some(cp_len)` also denoises to the CP span.
    pub interp_taps: Option<usize>,
    /// Worker threads; does not affect results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            system: System::Gfdm,
            k: 128,
            m: 5,
            pilot_spacing: 4,
            cp_len: 8,
            alpha: 0.5,
            delta: 2,
            n_a: 18,
            j_max: 2,
            basis: BasisKind::Ce,
            estimators: EstimatorKind::ALL.to_vec(),
            ebn0_grid_db: (0..=6).map(|i| 5.0 * i as f64).collect(),
            trials: 2000,
            min_trials: 64,
            target_errors: 200,
            batch_size: 64,
            master_seed: 42,
            channel: ChannelProfile::default(),
            interp_taps: None,
            threads: None,
        }
    }
}

impl SimConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid config JSON: {e}")))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn waveform_params(&self) -> Result<WaveformParams> {
        WaveformParams::with_delta(
            self.system,
            self.k,
            self.m,
            self.delta,
            self.alpha,
            self.pilot_spacing,
            self.cp_len,
        )
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec> {
        Ok(
            ChannelSpec::new(self.channel.delays.clone(), self.channel.powers.clone(), self.cp_len)?
                .with_delay_model(self.channel.delay_model)
                .with_fading(self.channel.fading),
        )
    }

    pub fn interp_taps(&self) -> usize {
        self.interp_taps.unwrap_or(self.k / self.pilot_spacing.max(1))
    }

    /// Checks every constraint before any trial runs; failures are
    /// [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        let params = self.waveform_params().map_err(cfg)?;
        self.channel_spec().map_err(cfg)?;
        if self.trials == 0 || self.batch_size == 0 {
            return Err(Error::Config("trials and batch size must be positive".into()));
        }
        if self.min_trials > self.trials {
            return Err(Error::Config(format!(
                "min_trials {} exceeds trials {}",
                self.min_trials, self.trials
            )));
        }
        if self.ebn0_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("Eb/N0 grid must be finite".into()));
        }
        if self.n_a == 0 || self.n_a > params.n_pilots() {
            return Err(Error::Config(format!(
                "N_a={} must lie in 1..={}",
                self.n_a,
                params.n_pilots()
            )));
        }
        let taps = self.interp_taps();
        if taps == 0 || taps > params.n_pilots() {
            return Err(Error::Config(format!(
                "interp_taps={taps} must lie in 1..={}",
                params.n_pilots()
            )));
        }
        if self.system == System::Gfdm && self.j_max > 0 && self.delta != 2 {
            return Err(Error::Config("interference cancellation needs delta = 2".into()));
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return Err(Error::Config("estimator list has duplicates".into()));
        }
        Ok(())
    }

    /// Data bits carried per frame.
    pub fn bits_per_frame(&self) -> u64 {
        2 * (self.k - self.k / self.pilot_spacing.max(1)) as u64 * self.m as u64
    }
}

/// `sigma^2 = Es / (2 * Eb/N0) * overhead` with unit-energy QPSK, where the
/// overhead charges the cyclic prefix (one per GFDM block, one per OFDM
/// symbol) and the pilot subcarriers, `(block + cp) / block * K / (K - N_p)`.
pub fn ebn0_to_noise_variance(ebn0_db: f64, config: &SimConfig) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    let block = match config.system {
        System::Gfdm => config.k * config.m,
        System::Ofdm => config.k,
    } as f64;
    let cp = block + config.cp_len as f64;
    let n_p = (config.k / config.pilot_spacing.max(1)) as f64;
    let pilots = config.k as f64 / (config.k as f64 - n_p);
    1.0 / (2.0 * ebn0) * (cp / block) * pilots
}
