use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::filter::{rrc_prototype, PrototypeFilter};
use super::{add_cp, System, WaveformParams};
use crate::error::{Error, Result};
use crate::primitives::{block_diag, circulant, dft_matrix, kronecker, repetition_matrix, ComplexGrid, UnitaryFft};

/// Largest filter response tolerated at a neighbouring subcarrier's centre bin.
const PILOT_NULL_TOLERANCE: f64 = 1e-6;

/// Per-subcarrier symbol vectors of one GFDM block, both `K x M`.
///
/// Row `k` of `data` is `ď_k` (time-indexed symbols, DFT-spread by the
/// modulator) and must be zero on pilot subcarriers. Row `k` of `pilots` is
/// `d̃_k` and must be zero on data subcarriers; on a pilot subcarrier entry 0
/// is the pilot and entries `1..M` are optional symbols spread by
/// `W_{M-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSymbols {
    pub data: DMatrix<Complex64>,
    pub pilots: DMatrix<Complex64>,
}

impl FrameSymbols {
    pub fn zeros(params: &WaveformParams) -> Self {
        Self {
            data: DMatrix::zeros(params.k, params.m),
            pilots: DMatrix::zeros(params.k, params.m),
        }
    }

    /// Checks shapes and that data and pilots never share a subcarrier.
    pub fn validate(&self, params: &WaveformParams) -> Result<()> {
        for mat in [&self.data, &self.pilots] {
            if mat.nrows() != params.k || mat.ncols() != params.m {
                return Err(Error::InvalidDimension(format!(
                    "symbol grid is {}x{}, expected {}x{}",
                    mat.nrows(),
                    mat.ncols(),
                    params.k,
                    params.m
                )));
            }
        }
        let zero_row = |mat: &DMatrix<Complex64>, k: usize| mat.row(k).iter().all(|z| *z == Complex64::default());
        for k in 0..params.k {
            if params.is_pilot_subcarrier(k) {
                if !zero_row(&self.data, k) {
                    return Err(Error::Framing(format!("data symbols on pilot subcarrier {k}")));
                }
            } else if !zero_row(&self.pilots, k) {
                return Err(Error::Framing(format!("pilot symbols on data subcarrier {k}")));
            }
        }
        Ok(())
    }
}

/// A modulated GFDM block.
#[derive(Debug, Clone)]
pub struct GfdmFrame {
    pub symbols: FrameSymbols,
    pub time_signal: Vec<Complex64>,
    pub with_cp: Vec<Complex64>,
}

impl GfdmFrame {
    pub fn assemble(modem: &GfdmModem, symbols: FrameSymbols) -> Result<Self> {
        let time_signal = modem.modulate(&symbols)?;
        let with_cp = add_cp(&time_signal, modem.params().cp_len)?;
        Ok(Self {
            symbols,
            time_signal,
            with_cp,
        })
    }
}

/// Frequency-domain GFDM modulator/demodulator for one parameter set.
#[derive(Debug, Clone)]
pub struct GfdmModem {
    params: WaveformParams,
    filter: PrototypeFilter,
    fft: UnitaryFft,
    dft_m: DMatrix<Complex64>,
    dft_pilot_data: Option<DMatrix<Complex64>>,
}

impl GfdmModem {
    /// Builds the modem and verifies that the filter is null at every
    /// neighbouring subcarrier centre, which is what keeps pilots free of
    /// inter-carrier interference.
    pub fn new(params: &WaveformParams) -> Result<Self> {
        if params.system != System::Gfdm {
            return Err(Error::Parameter("GFDM modem needs GFDM parameters".into()));
        }
        let filter = rrc_prototype(params)?;
        let (m, md) = (params.m, params.m * params.delta);
        for i in (m..md).step_by(m) {
            let leak = filter.response()[i].norm();
            if leak > PILOT_NULL_TOLERANCE {
                return Err(Error::Parameter(format!(
                    "filter response {leak:.3e} at adjacent centre bin breaks pilot orthogonality"
                )));
            }
        }
        let dft_pilot_data = if m > 1 {
            Some(dft_matrix(m - 1)?.into_matrix())
        } else {
            None
        };
        Ok(Self {
            params: params.clone(),
            filter,
            fft: UnitaryFft::new(params.n()),
            dft_m: dft_matrix(m)?.into_matrix(),
            dft_pilot_data,
        })
    }

    pub fn params(&self) -> &WaveformParams {
        &self.params
    }

    pub fn filter(&self) -> &PrototypeFilter {
        &self.filter
    }

    pub fn fft(&self) -> &UnitaryFft {
        &self.fft
    }

    /// Width of a subcarrier's frequency window, `M * delta`.
    pub fn window_len(&self) -> usize {
        self.params.m * self.params.delta
    }

    /// `N`-grid bin of entry `i` of subcarrier `k`'s window.
    pub fn window_bin(&self, k: usize, i: usize) -> usize {
        let md = self.window_len() as i64;
        let off = if 2 * (i as i64) < md { i as i64 } else { i as i64 - md };
        let n = self.params.n() as i64;
        ((k * self.params.m) as i64 + off).rem_euclid(n) as usize
    }

    /// `W_M d`.
    pub fn spread(&self, d: &[Complex64]) -> Vec<Complex64> {
        (&self.dft_m * DVector::from_column_slice(d)).as_slice().to_vec()
    }

    /// `W_M^H d`.
    pub fn despread(&self, d: &[Complex64]) -> Vec<Complex64> {
        (self.dft_m.adjoint() * DVector::from_column_slice(d))
            .as_slice()
            .to_vec()
    }

    /// `Γ d̃_k + W_M ď_k` for subcarrier `k`.
    pub fn subcarrier_vector(&self, symbols: &FrameSymbols, k: usize) -> Vec<Complex64> {
        let m = self.params.m;
        let data: Vec<Complex64> = symbols.data.row(k).iter().copied().collect();
        let mut out = self.spread(&data);
        let pilots: Vec<Complex64> = symbols.pilots.row(k).iter().copied().collect();
        out[0] += pilots[0] * self.params.pilot_lambda;
        if let Some(w) = &self.dft_pilot_data {
            let tail = w * DVector::from_column_slice(&pilots[1..m]);
            for (o, t) in out[1..].iter_mut().zip(tail.iter()) {
                *o += t;
            }
        }
        out
    }

    /// Adds `P^(k) G^(delta) S^(delta) D` to the `N`-bin spectrum `out`.
    pub fn add_subcarrier_spectrum(&self, k: usize, d_freq: &[Complex64], out: &mut [Complex64]) {
        for (i, v) in self.subcarrier_window(d_freq).into_iter().enumerate() {
            out[self.window_bin(k, i)] += v;
        }
    }

    /// `G^(delta) S^(delta) D`: one subcarrier's `M*delta` window values.
    pub fn subcarrier_window(&self, d_freq: &[Complex64]) -> Vec<Complex64> {
        let m = self.params.m;
        self.filter
            .response()
            .iter()
            .enumerate()
            .map(|(i, gi)| gi * d_freq[i % m])
            .collect()
    }

    /// Values of `spectrum` on subcarrier `k`'s window, `(P^(k))^T` restricted.
    pub fn window_values(&self, spectrum: &[Complex64], k: usize) -> Vec<Complex64> {
        (0..self.window_len())
            .map(|i| spectrum[self.window_bin(k, i)])
            .collect()
    }

    /// `(S^(delta))^T (G^(delta))^*` applied to window values.
    pub fn matched_window(&self, window: &[Complex64]) -> Vec<Complex64> {
        let m = self.params.m;
        let mut out = vec![Complex64::default(); m];
        for (i, (gi, w)) in self.filter.response().iter().zip(window).enumerate() {
            out[i % m] += gi.conj() * w;
        }
        out
    }

    /// Transmit spectrum `W_N x`.
    pub fn modulate_spectrum(&self, symbols: &FrameSymbols) -> Result<Vec<Complex64>> {
        symbols.validate(&self.params)?;
        let mut spec = vec![Complex64::default(); self.params.n()];
        for k in 0..self.params.k {
            let d = self.subcarrier_vector(symbols, k);
            self.add_subcarrier_spectrum(k, &d, &mut spec);
        }
        Ok(spec)
    }

    /// Time-domain block `x = W_N^H sum_k P^(k) G S (Γ d̃_k + W_M ď_k)`.
    pub fn modulate(&self, symbols: &FrameSymbols) -> Result<Vec<Complex64>> {
        let mut spec = self.modulate_spectrum(symbols)?;
        self.fft.inverse_inplace(&mut spec);
        Ok(spec)
    }

    /// Same as [`modulate`](Self::modulate) but built from explicit dense
    /// matrices. `O(N^2 K)`; meant for cross-checking small configurations.
    ///
    /// `P^(k) = Ψ(p^(k)) ⊗ I_M` is an `N x N` circular shift, so the
    /// `M*delta` filter output is first embedded into the `N`-grid with its
    /// negative-frequency half wrapped to the top.
    pub fn modulate_dense(&self, symbols: &FrameSymbols) -> Result<Vec<Complex64>> {
        symbols.validate(&self.params)?;
        let p = &self.params;
        let (k_count, m, n, md) = (p.k, p.m, p.n(), self.window_len());

        let g = ComplexGrid::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(
            self.filter.response(),
        )))?;
        let s = repetition_matrix(p.delta, m)?;
        let w_m = dft_matrix(m)?;
        let lambda = ComplexGrid::from_matrix(DMatrix::from_element(1, 1, Complex64::new(p.pilot_lambda, 0.0)))?;
        let gamma = if m > 1 {
            block_diag(&[&lambda, &dft_matrix(m - 1)?])?
        } else {
            lambda
        };
        let embed = DMatrix::from_fn(n, md, |r, c| {
            let off = if 2 * c < md { c } else { n - md + c };
            if r == off {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        let eye_m = ComplexGrid::identity(m)?;

        let mut spec = DVector::<Complex64>::zeros(n);
        let chain = embed * g.as_matrix() * s.as_matrix();
        for k in 0..k_count {
            let mut pk = vec![Complex64::default(); k_count];
            pk[k] = Complex64::new(1.0, 0.0);
            let shift = kronecker(&circulant(&pk)?, &eye_m)?;
            let dk = DVector::from_iterator(m, symbols.data.row(k).iter().copied());
            let pilot_k = DVector::from_iterator(m, symbols.pilots.row(k).iter().copied());
            let inner = gamma.as_matrix() * pilot_k + w_m.as_matrix() * dk;
            spec += shift.as_matrix() * (&chain * inner);
        }
        let w_n = dft_matrix(n)?;
        Ok((w_n.as_matrix().adjoint() * spec).as_slice().to_vec())
    }

    /// `(S^(delta))^T (G^(delta))^* (P^(k))^T` applied to an `N`-bin spectrum.
    pub fn matched_filter(&self, spectrum: &[Complex64], k: usize) -> Vec<Complex64> {
        self.matched_window(&self.window_values(spectrum, k))
    }

    /// Demodulates subcarrier `k` from an `N`-bin spectrum.
    pub fn demodulate_spectrum(&self, spectrum: &[Complex64], k: usize) -> Vec<Complex64> {
        self.despread(&self.matched_filter(spectrum, k))
    }

    /// `d̂_k = W_M^H S^T G^* P^(k)^T W_N y`.
    pub fn demodulate(&self, y: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
        if y.len() != self.params.n() {
            return Err(Error::InvalidDimension(format!(
                "expected {} samples, got {}",
                self.params.n(),
                y.len()
            )));
        }
        if k >= self.params.k {
            return Err(Error::Index(format!("subcarrier {k} >= K={}", self.params.k)));
        }
        let spec = self.fft.forward(y);
        Ok(self.demodulate_spectrum(&spec, k))
    }
}

/// Direct time-domain GFDM synthesis,
/// `x[n] = sum_k sum_m d_k[m] g[(n - mK) mod N] exp(j 2 pi k n / K)`.
pub fn gfdm_modulate_direct(d: &DMatrix<Complex64>, filter: &PrototypeFilter) -> Result<Vec<Complex64>> {
    let (k_count, m) = (d.nrows(), d.ncols());
    let n = filter.g().len();
    if m != filter.m() || k_count * m != n {
        return Err(Error::InvalidDimension(format!(
            "symbol grid {k_count}x{m} does not match filter period {n}"
        )));
    }
    let g = filter.g();
    let mut x = vec![Complex64::default(); n];
    for (idx, xn) in x.iter_mut().enumerate() {
        for k in 0..k_count {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * ((k * idx) % k_count) as f64 / k_count as f64);
            let mut acc = Complex64::default();
            for mm in 0..m {
                acc += d[(k, mm)] * g[(idx + n - (mm * k_count) % n) % n];
            }
            *xn += acc * phase;
        }
    }
    Ok(x)
}

/// Free-function form of [`GfdmModem::demodulate`].
pub fn gfdm_demodulate(y: &[Complex64], k: usize, modem: &GfdmModem) -> Result<Vec<Complex64>> {
    modem.demodulate(y, k)
}
