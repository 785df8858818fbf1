use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::config::{ebn0_to_noise_variance, SimConfig};
use crate::channel::{
    add_awgn_with, apply_channel, draw_channel_with, true_pilot_covariance, ChannelRealization, ChannelSpec,
};
use crate::detection::{count_bit_errors, ic_receive, ofdm_detect, zf_equalize};
use crate::error::Result;
use crate::estimators::{EstimatorBank, EstimatorKind, PilotObservation};
use crate::primitives::QpskSymbol;
use crate::rng::{trial_rng, Stream};
use crate::waveforms::{
    add_cp, extract_pilots, pilot_sequence, remove_cp, FrameSymbols, GfdmModem, OfdmModem, System, WaveformParams,
};

/// One curve of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Estimator(EstimatorKind),
    /// Equalization with the true channel response.
    Perfect,
}

impl Curve {
    pub fn label(self) -> &'static str {
        match self {
            Curve::Estimator(k) => k.label(),
            Curve::Perfect => "perfect",
        }
    }
}

/// Per-trial metrics of one curve at one Eb/N0 point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CurveOutcome {
    /// `||h_p - h_p_hat||^2 / ||h_p||^2` at the pilots.
    pub mse: Option<f64>,
    /// Same ratio over the full grid.
    pub mse_full: Option<f64>,
    pub bit_errors: u64,
    pub bits: u64,
}

enum Modem {
    Gfdm(GfdmModem),
    Ofdm(OfdmModem),
}

struct Point {
    noise_variance: f64,
    bank: EstimatorBank,
}

/// A configured transmit/channel/receive chain with all per-point factors
/// precomputed.
pub struct Link {
    params: WaveformParams,
    spec: ChannelSpec,
    modem: Modem,
    pilots: Vec<Complex64>,
    points: Vec<Point>,
    curves: Vec<Curve>,
    master_seed: u64,
    j_max: usize,
    with_ber: bool,
}

impl Link {
    pub fn new(config: &SimConfig, with_ber: bool) -> Result<Self> {
        let params = config.waveform_params()?;
        let spec = config.channel_spec()?;
        let modem = match params.system {
            System::Gfdm => Modem::Gfdm(GfdmModem::new(&params)?),
            System::Ofdm => Modem::Ofdm(OfdmModem::new(&params)?),
        };
        let true_cov = true_pilot_covariance(&spec, &params)?;
        let pilot_energy = params.pilot_gain.norm_sqr();
        let points = config
            .ebn0_grid_db
            .iter()
            .map(|&db| {
                let noise_variance = ebn0_to_noise_variance(db, config);
                let bank = EstimatorBank::new(
                    &params,
                    config.basis,
                    config.n_a,
                    config.interp_taps(),
                    noise_variance / pilot_energy,
                    &true_cov,
                    &config.estimators,
                )?;
                Ok(Point { noise_variance, bank })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut curves: Vec<Curve> = config.estimators.iter().map(|&k| Curve::Estimator(k)).collect();
        if with_ber {
            curves.push(Curve::Perfect);
        }
        Ok(Self {
            pilots: pilot_sequence(params.n_pilots(), config.master_seed),
            params,
            spec,
            modem,
            points,
            curves,
            master_seed: config.master_seed,
            j_max: config.j_max,
            with_ber,
        })
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    fn random_data(&self, trial: u64) -> DMatrix<Complex64> {
        let p = &self.params;
        let mut rng = trial_rng(self.master_seed, Stream::Data, trial);
        let mut d = DMatrix::zeros(p.k, p.m);
        for k in p.data_subcarriers() {
            for m in 0..p.m {
                d[(k, m)] = QpskSymbol::from_index(rng.random_range(0..4)).value();
            }
        }
        d
    }

    /// Runs trial `trial` at every point flagged in `active`. The channel,
    /// data and unit-variance noise depend only on `(master_seed, trial)`.
    pub fn run_trial(&self, trial: u64, active: &[bool]) -> Result<Vec<Option<Vec<CurveOutcome>>>> {
        let p = &self.params;
        let real = draw_channel_with(
            &self.spec,
            p.grid_size(),
            &mut trial_rng(self.master_seed, Stream::Channel, trial),
        )?;
        let data = self.random_data(trial);
        let (tx, truth) = match &self.modem {
            Modem::Gfdm(md) => {
                let mut s = FrameSymbols::zeros(p);
                s.data = data.clone();
                for (q, v) in self.pilots.iter().enumerate() {
                    s.pilots[(q * p.pilot_spacing, 0)] = *v;
                }
                (add_cp(&md.modulate(&s)?, p.cp_len)?, data)
            }
            Modem::Ofdm(md) => {
                let mut s = data;
                for (q, v) in self.pilots.iter().enumerate() {
                    s.row_mut(q * p.pilot_spacing).fill(*v);
                }
                (md.modulate_frame(&s)?, s)
            }
        };
        let clean = apply_channel(&tx, &real, p.cp_len)?;
        self.points
            .iter()
            .zip(active)
            .map(|(point, &on)| {
                if !on {
                    return Ok(None);
                }
                let rx = add_awgn_with(
                    &clean,
                    point.noise_variance,
                    &mut trial_rng(self.master_seed, Stream::Noise, trial),
                )?;
                self.receive(point, &rx, &real, &truth).map(Some)
            })
            .collect()
    }

    fn receive(
        &self,
        point: &Point,
        rx: &[Complex64],
        real: &ChannelRealization,
        truth: &DMatrix<Complex64>,
    ) -> Result<Vec<CurveOutcome>> {
        let p = &self.params;
        let h_p: Vec<Complex64> = p.pilot_bins.iter().map(|&b| real.freq_response[b]).collect();
        let obs_noise = point.noise_variance / p.pilot_gain.norm_sqr();
        // one spectrum per block: the GFDM block, or each OFDM symbol
        let spectra: Vec<Vec<Complex64>> = match &self.modem {
            Modem::Gfdm(md) => vec![md.fft().forward(&remove_cp(rx, p.cp_len)?)],
            Modem::Ofdm(md) => {
                let s = md.demodulate_frame(rx)?;
                s.column_iter().map(|c| c.iter().copied().collect()).collect()
            }
        };
        let observations = spectra
            .iter()
            .map(|s| PilotObservation::new(extract_pilots(s, p)?, self.pilots.clone(), obs_noise))
            .collect::<Result<Vec<_>>>()?;

        let mut out = Vec::with_capacity(self.curves.len());
        for curve in &self.curves {
            let mut outcome = CurveOutcome::default();
            let mut h_fulls = Vec::with_capacity(spectra.len());
            match curve {
                Curve::Estimator(kind) => {
                    let (mut mse, mut mse_full) = (0.0, 0.0);
                    for obs in &observations {
                        let est = point.bank.estimate(*kind, obs)?;
                        mse += ratio(&est.h_pilot, &h_p);
                        let full = point.bank.full_grid(&est)?;
                        mse_full += ratio(&full, &real.freq_response);
                        h_fulls.push(full);
                    }
                    let blocks = observations.len() as f64;
                    outcome.mse = Some(mse / blocks);
                    outcome.mse_full = Some(mse_full / blocks);
                }
                Curve::Perfect => h_fulls = vec![real.freq_response.clone(); spectra.len()],
            }
            if self.with_ber {
                let decided = self.detect(&spectra, &h_fulls)?;
                let (e, b) = count_bit_errors(&decided, truth, p)?;
                outcome.bit_errors = e;
                outcome.bits = b;
            }
            out.push(outcome);
        }
        Ok(out)
    }

    fn detect(&self, spectra: &[Vec<Complex64>], h_fulls: &[Vec<Complex64>]) -> Result<DMatrix<Complex64>> {
        let p = &self.params;
        match &self.modem {
            Modem::Gfdm(md) => ic_receive(&zf_equalize(&spectra[0], &h_fulls[0])?, md, self.j_max),
            Modem::Ofdm(_) => {
                let mut eq = DMatrix::zeros(p.k, p.m);
                for (m, (s, h)) in spectra.iter().zip(h_fulls).enumerate() {
                    eq.column_mut(m).copy_from_slice(&zf_equalize(s, h)?);
                }
                ofdm_detect(&eq, p)
            }
        }
    }
}

fn ratio(est: &[Complex64], truth: &[Complex64]) -> f64 {
    let err: f64 = est.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = truth.iter().map(|z| z.norm_sqr()).sum();
    err / norm.max(f64::MIN_POSITIVE)
}
