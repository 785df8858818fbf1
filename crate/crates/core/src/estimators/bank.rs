use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{BasisKind, BemDesign};
use super::bem::{apply, coefficient_covariance, BemLmmseFilter};
use super::interp::DelayInterpolator;
use super::{ls_estimate, EstimateResult, EstimatorKind, PilotObservation};
use crate::channel::{approx_pilot_covariance, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::waveforms::WaveformParams;

/// Precomputed `W = R (R + s2 I)^-1`.
#[derive(Debug, Clone)]
pub struct LmmseFilter {
    w: DMatrix<Complex64>,
}

impl LmmseFilter {
    /// With `s2 = 0` the filter is the identity, the LS limit.
    ///
    /// Built from `R = V diag(l) V^H` as `V diag(l / (l + s2)) V^H`, which
    /// stays defined for rank-deficient priors at any noise level.
    pub fn new(r: &CovarianceMatrix, noise_variance: f64) -> Result<Self> {
        let skew = r.hermitian_defect();
        if skew > 1e-12 {
            return Err(Error::Contract(format!("covariance not Hermitian (defect {skew:.3e})")));
        }
        if noise_variance.is_nan() || noise_variance < 0.0 {
            return Err(Error::Parameter(format!(
                "noise variance {noise_variance} must be >= 0"
            )));
        }
        let n = r.dim();
        if noise_variance == 0.0 {
            return Ok(Self {
                w: DMatrix::identity(n, n),
            });
        }
        let eig = r.entries().clone().symmetric_eigen();
        let shrink = eig.eigenvalues.map(|l| {
            let l = l.max(0.0);
            Complex64::new(l / (l + noise_variance), 0.0)
        });
        let v = &eig.eigenvectors;
        Ok(Self {
            w: v * DMatrix::from_diagonal(&shrink) * v.adjoint(),
        })
    }

    pub fn gain(&self) -> &DMatrix<Complex64> {
        &self.w
    }

    pub fn estimate(&self, obs: &PilotObservation) -> Result<EstimateResult> {
        if obs.n_pilots() != self.w.nrows() {
            return Err(Error::InvalidDimension(format!(
                "{} pilots for a {}-pilot filter",
                obs.n_pilots(),
                self.w.nrows()
            )));
        }
        let ls = ls_estimate(obs)?;
        Ok(EstimateResult {
            kind: EstimatorKind::Lmmse,
            h_pilot: apply(&self.w, &ls.h_pilot),
            h_full: None,
            a_hat: None,
        })
    }
}

/// All channel-independent estimator factors for one frame geometry, basis
/// and noise level.
#[derive(Debug, Clone)]
pub struct EstimatorBank {
    design: BemDesign,
    interp: DelayInterpolator,
    noise_variance: f64,
    lmmse: Option<LmmseFilter>,
    lmmse_bem: Option<BemLmmseFilter>,
    almmse_bem: Option<BemLmmseFilter>,
}

impl EstimatorBank {
    /// `true_cov` feeds LMMSE and LMMSE-BEM; aLMMSE-BEM uses the
    /// constant-PDP covariance over the CP.
    pub fn new(
        params: &WaveformParams,
        basis: BasisKind,
        n_a: usize,
        interp_taps: usize,
        noise_variance: f64,
        true_cov: &CovarianceMatrix,
        kinds: &[EstimatorKind],
    ) -> Result<Self> {
        let design = BemDesign::new(params, n_a, basis)?;
        let interp = DelayInterpolator::new(params, interp_taps)?;
        let wants = |k: EstimatorKind| kinds.contains(&k);
        let lmmse = if wants(EstimatorKind::Lmmse) {
            Some(LmmseFilter::new(true_cov, noise_variance)?)
        } else {
            None
        };
        let lmmse_bem = if wants(EstimatorKind::LmmseBem) {
            let r_a = coefficient_covariance(true_cov, &design.pilot)?;
            Some(BemLmmseFilter::new(&design.pilot, &r_a, noise_variance)?)
        } else {
            None
        };
        let almmse_bem = if wants(EstimatorKind::AlmmseBem) {
            let approx = approx_pilot_covariance(params.cp_len, params.k, params.pilot_spacing, params.n_pilots())?;
            let r_a = coefficient_covariance(&approx, &design.pilot)?;
            Some(BemLmmseFilter::new(&design.pilot, &r_a, noise_variance)?)
        } else {
            None
        };
        Ok(Self {
            design,
            interp,
            noise_variance,
            lmmse,
            lmmse_bem,
            almmse_bem,
        })
    }

    pub fn design(&self) -> &BemDesign {
        &self.design
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Pilot-grid estimate; touches only precomputed factors.
    pub fn estimate(&self, kind: EstimatorKind, obs: &PilotObservation) -> Result<EstimateResult> {
        let missing = || Error::Config(format!("estimator {} was not prepared", kind.label()));
        let b = &self.design.pilot;
        match kind {
            EstimatorKind::Ls => ls_estimate(obs),
            EstimatorKind::Lmmse => self.lmmse.as_ref().ok_or_else(missing)?.estimate(obs),
            EstimatorKind::LsBem => super::ls_bem_estimate(obs, b),
            EstimatorKind::LmmseBem => self.lmmse_bem.as_ref().ok_or_else(missing)?.estimate(obs, b, kind),
            EstimatorKind::AlmmseBem => self.almmse_bem.as_ref().ok_or_else(missing)?.estimate(obs, b, kind),
        }
    }

    /// Full-grid response for an estimate produced by this bank.
    pub fn full_grid(&self, result: &EstimateResult) -> Result<Vec<Complex64>> {
        match &result.a_hat {
            Some(a) => Ok(apply(&self.design.full, a)),
            None => self.interp.interpolate(&result.h_pilot),
        }
    }

    /// [`estimate`](Self::estimate) followed by [`full_grid`](Self::full_grid).
    pub fn estimate_full(&self, kind: EstimatorKind, obs: &PilotObservation) -> Result<EstimateResult> {
        let mut r = self.estimate(kind, obs)?;
        r.h_full = Some(self.full_grid(&r)?);
        Ok(r)
    }
}
