use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use super::ChannelSpec;
use crate::error::{Error, Result};
use crate::waveforms::WaveformParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    /// Built from the channel's actual power delay profile.
    TruePdp,
    /// Constant `1/L` profile over integer delays `0..L`.
    Approximated,
}

/// Pilot-domain channel covariance `E{h_p h_p^H}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<Complex64>,
    kind: CovarianceKind,
}

impl CovarianceMatrix {
    /// Wraps `entries`, rejecting non-square or non-Hermitian input.
    pub fn new(entries: DMatrix<Complex64>, kind: CovarianceKind) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "covariance must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let cov = Self { entries, kind };
        let skew = cov.hermitian_defect();
        if skew > 1e-12 {
            return Err(Error::Contract(format!("covariance not Hermitian (defect {skew:.3e})")));
        }
        Ok(cov)
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |R - R^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `max |R(n,p) - R(n-p)|` over all entries, against the first row/column.
    pub fn toeplitz_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let reference = if r >= c {
                    self.entries[(r - c, 0)]
                } else {
                    self.entries[(0, c - r)]
                };
                worst = worst.max((self.entries[(r, c)] - reference).norm());
            }
        }
        worst
    }

    /// Hermitian to 1e-12 and PSD to -1e-10.
    pub fn validate(&self) -> Result<()> {
        let skew = self.hermitian_defect();
        if skew > 1e-12 {
            return Err(Error::Contract(format!("covariance not Hermitian (defect {skew:.3e})")));
        }
        let lo = self.min_eigenvalue();
        if lo < -1e-10 {
            return Err(Error::Contract(format!("covariance not PSD (min eigenvalue {lo:.3e})")));
        }
        Ok(())
    }
}

/// Pilot covariance of `spec` at the normalized pilot frequencies
/// `q * p_s / K`, `R(n,p) = sum_l P_l S_l(f_n) S_l(f_p)^*` where `S_l` is path
/// `l`'s response. For exact fractional delays this is
/// `sum_l P_l exp(-j 2 pi p_s (n-p) tau_l / K)`.
pub fn true_pilot_covariance(spec: &ChannelSpec, params: &WaveformParams) -> Result<CovarianceMatrix> {
    let n_p = params.n_pilots();
    let resp: Vec<Vec<Complex64>> = (0..spec.n_taps())
        .map(|l| {
            (0..n_p)
                .map(|q| spec.path_response(l, (q * params.pilot_spacing) as f64 / params.k as f64))
                .collect()
        })
        .collect();
    let mut r = DMatrix::from_fn(n_p, n_p, |n, p| {
        spec.powers
            .iter()
            .zip(&resp)
            .map(|(pw, s)| s[n] * s[p].conj() * *pw)
            .sum::<Complex64>()
    });
    r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    CovarianceMatrix::new(r, CovarianceKind::TruePdp)
}

type ApproxKey = (usize, usize, usize, usize);

fn approx_cache() -> &'static Mutex<HashMap<ApproxKey, Arc<CovarianceMatrix>>> {
    static CACHE: OnceLock<Mutex<HashMap<ApproxKey, Arc<CovarianceMatrix>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `R~(n,p) = (1/L) sum_{l=0}^{L-1} exp(-j 2 pi p_s (n-p) l / K)`.
///
/// Depends only on the frame geometry, so each tuple is computed once per
/// process and shared.
pub fn approx_pilot_covariance(
    cp_len: usize,
    k: usize,
    pilot_spacing: usize,
    n_pilots: usize,
) -> Result<Arc<CovarianceMatrix>> {
    if cp_len == 0 || k == 0 || n_pilots == 0 {
        return Err(Error::Parameter("CP length, K and pilot count must be positive".into()));
    }
    let key = (cp_len, k, pilot_spacing, n_pilots);
    let mut cache = approx_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(hit) = cache.get(&key) {
        return Ok(Arc::clone(hit));
    }
    let l = cp_len as f64;
    let r = DMatrix::from_fn(n_pilots, n_pilots, |n, p| {
        if n == p {
            return Complex64::new(1.0, 0.0);
        }
        let lag = pilot_spacing as i64 * (n as i64 - p as i64);
        (0..cp_len)
            .map(|t| {
                // reduce the phase index exactly before converting to an angle
                let idx = (lag * t as i64).rem_euclid(k as i64) as f64;
                Complex64::from_polar(1.0 / l, -2.0 * PI * idx / k as f64)
            })
            .sum()
    });
    let cov = Arc::new(CovarianceMatrix::new(r, CovarianceKind::Approximated)?);
    cache.insert(key, Arc::clone(&cov));
    Ok(cov)
}
