//! Pilot-aided channel estimators.
//!
//! Every estimator starts from the least-squares estimate at the pilots,
//! `h_LS = X^-1 y_p`, and differs in how it regularizes it:
//!
//! | kind        | pilot estimate                                 |
//! |-------------|------------------------------------------------|
//! | LS          | `h_LS`                                         |
//! | LMMSE       | `R (R + beta/snr I)^-1 h_LS`                   |
//! | LS-BEM      | `B (B^H B)^-1 B^H h_LS`                        |
//! | LMMSE-BEM   | `B R_a B^H (B R_a B^H + s2 I)^-1 X^H y_p`      |
//! | aLMMSE-BEM  | LMMSE-BEM with `R_a` from the constant-PDP prior |
//!
//! Channel-independent factors are built once (see [`EstimatorBank`]); the
//! per-block paths only apply precomputed matrices.

mod bank;
mod basis;
mod bem;
mod interp;
pub mod ops;

pub use bank::{EstimatorBank, LmmseFilter};
pub use basis::{ce_basis, lp_basis, BasisKind, BasisMatrix, BemDesign, GridKind};
pub use bem::{
    almmse_bem_estimate, coefficient_covariance, lmmse_bem_estimate, lmmse_bem_primal, ls_bem_estimate, BemLmmseFilter,
};
pub use interp::{interpolate_full_grid, DelayInterpolator};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::CovarianceMatrix;
use crate::error::{Error, Result};

/// Unit-modulus tolerance for pilot symbols.
const PILOT_MODULUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "ls")]
    Ls,
    #[serde(rename = "lmmse")]
    Lmmse,
    #[serde(rename = "ls-bem")]
    LsBem,
    #[serde(rename = "lmmse-bem")]
    LmmseBem,
    #[serde(rename = "almmse-bem")]
    AlmmseBem,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Ls,
        EstimatorKind::Lmmse,
        EstimatorKind::LsBem,
        EstimatorKind::LmmseBem,
        EstimatorKind::AlmmseBem,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Ls => "ls",
            EstimatorKind::Lmmse => "lmmse",
            EstimatorKind::LsBem => "ls-bem",
            EstimatorKind::LmmseBem => "lmmse-bem",
            EstimatorKind::AlmmseBem => "almmse-bem",
        }
    }

    pub fn is_bem(self) -> bool {
        matches!(
            self,
            EstimatorKind::LsBem | EstimatorKind::LmmseBem | EstimatorKind::AlmmseBem
        )
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.label() == norm)
            .ok_or_else(|| Error::Config(format!("unknown estimator '{s}'")))
    }
}

/// Received and transmitted pilot values of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    pub y_p: Vec<Complex64>,
    pub x_p: Vec<Complex64>,
    /// Noise variance per pilot, `beta / snr`.
    pub noise_variance: f64,
    /// `E{|d|^2} E{1/|d|^2}`, one for constant-modulus alphabets.
    pub beta: f64,
}

impl PilotObservation {
    /// Checks lengths, a non-negative noise variance and unit-modulus pilots.
    pub fn new(y_p: Vec<Complex64>, x_p: Vec<Complex64>, noise_variance: f64) -> Result<Self> {
        if y_p.len() != x_p.len() || y_p.is_empty() {
            return Err(Error::InvalidDimension(format!(
                "{} observations for {} pilots",
                y_p.len(),
                x_p.len()
            )));
        }
        if noise_variance.is_nan() || noise_variance < 0.0 {
            return Err(Error::Parameter(format!(
                "noise variance {noise_variance} must be >= 0"
            )));
        }
        for (i, x) in x_p.iter().enumerate() {
            if x.norm() == 0.0 {
                return Err(Error::SingularPilot(i));
            }
            if (x.norm() - 1.0).abs() > PILOT_MODULUS_TOL {
                return Err(Error::Contract(format!("pilot {i} has modulus {}", x.norm())));
            }
        }
        Ok(Self {
            y_p,
            x_p,
            noise_variance,
            beta: 1.0,
        })
    }

    /// Observation with `sigma^2 = beta / snr_linear`, `beta = 1`.
    pub fn from_snr(y_p: Vec<Complex64>, x_p: Vec<Complex64>, snr_linear: f64) -> Result<Self> {
        if snr_linear.is_nan() || snr_linear <= 0.0 {
            return Err(Error::Parameter(format!("SNR {snr_linear} must be positive")));
        }
        Self::new(y_p, x_p, 1.0 / snr_linear)
    }

    pub fn n_pilots(&self) -> usize {
        self.y_p.len()
    }

    /// `X^H y_p`.
    pub fn matched(&self) -> Vec<Complex64> {
        ops::record(self.n_pilots() as u64);
        self.y_p.iter().zip(&self.x_p).map(|(y, x)| x.conj() * y).collect()
    }
}

/// Estimated channel at the pilots, optionally on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub kind: EstimatorKind,
    pub h_pilot: Vec<Complex64>,
    pub h_full: Option<Vec<Complex64>>,
    /// BEM coefficients; `None` for LS and LMMSE.
    pub a_hat: Option<Vec<Complex64>>,
}

/// `h_LS = X^-1 y_p`.
pub fn ls_estimate(obs: &PilotObservation) -> Result<EstimateResult> {
    let mut h = Vec::with_capacity(obs.n_pilots());
    for (i, (y, x)) in obs.y_p.iter().zip(&obs.x_p).enumerate() {
        if x.norm() == 0.0 {
            return Err(Error::SingularPilot(i));
        }
        h.push(y / x);
    }
    ops::record(obs.n_pilots() as u64);
    Ok(EstimateResult {
        kind: EstimatorKind::Ls,
        h_pilot: h,
        h_full: None,
        a_hat: None,
    })
}

/// `R (R + beta/snr I)^-1 h_LS`. Builds the filter on every call; use
/// [`LmmseFilter`] to amortize it.
pub fn lmmse_estimate(obs: &PilotObservation, r: &CovarianceMatrix) -> Result<EstimateResult> {
    let filter = LmmseFilter::new(r, obs.noise_variance)?;
    filter.estimate(obs)
}

#[cfg(test)]
mod tests;
