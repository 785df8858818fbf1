use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::BasisMatrix;
use super::{ls_estimate, ops, EstimateResult, EstimatorKind, PilotObservation};
use crate::channel::{CovarianceKind, CovarianceMatrix};
use crate::error::{Error, Result};

/// Eigenvalue repair beyond this is logged.
const PSD_REPAIR_LOG: f64 = 1e-10;

/// `m v`, counted as `rows * cols` multiply-accumulates.
pub(crate) fn apply(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    ops::record((m.nrows() * m.ncols()) as u64);
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

fn check_obs(obs: &PilotObservation, b: &BasisMatrix) -> Result<()> {
    if obs.n_pilots() != b.rows() {
        return Err(Error::InvalidDimension(format!(
            "{} pilots for a basis with {} rows",
            obs.n_pilots(),
            b.rows()
        )));
    }
    Ok(())
}

fn bem_result(kind: EstimatorKind, b: &BasisMatrix, a: Vec<Complex64>) -> EstimateResult {
    EstimateResult {
        kind,
        h_pilot: apply(b.matrix(), &a),
        h_full: None,
        a_hat: Some(a),
    }
}

/// `a = (B^H B)^-1 B^H h_LS`, `h = B a`.
pub fn ls_bem_estimate(obs: &PilotObservation, b: &BasisMatrix) -> Result<EstimateResult> {
    check_obs(obs, b)?;
    let ls = ls_estimate(obs)?;
    let a = apply(b.projector(), &ls.h_pilot);
    Ok(bem_result(EstimatorKind::LsBem, b, a))
}

/// `R_a = P R_h P^H` with `P = (B^H B)^-1 B^H`, made Hermitian PSD by
/// symmetrizing and flooring eigenvalues at zero.
pub fn coefficient_covariance(r_h: &CovarianceMatrix, b: &BasisMatrix) -> Result<DMatrix<Complex64>> {
    if r_h.dim() != b.rows() {
        return Err(Error::InvalidDimension(format!(
            "{}x{} covariance for a basis with {} rows",
            r_h.dim(),
            r_h.dim(),
            b.rows()
        )));
    }
    let p = b.projector();
    let r_a = p * r_h.entries() * p.adjoint();
    let r_a = (&r_a + r_a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = r_a.clone().symmetric_eigen();
    let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest >= 0.0 {
        return Ok(r_a);
    }
    if -lowest > PSD_REPAIR_LOG {
        log::debug!("coefficient covariance: flooring eigenvalue {lowest:.3e}");
    }
    let floored = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0), 0.0));
    let v = &eig.eigenvectors;
    let repaired = v * DMatrix::from_diagonal(&floored) * v.adjoint();
    Ok((&repaired + repaired.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Precomputed `F = R_a B^H (B R_a B^H + s2 I)^-1` for one noise level.
#[derive(Debug, Clone)]
pub struct BemLmmseFilter {
    f: DMatrix<Complex64>,
    fallback: bool,
}

impl BemLmmseFilter {
    /// Uses the dual form so a singular `R_a` is allowed. With `s2 = 0` and a
    /// singular `B R_a B^H` it degrades to the LS-BEM projector.
    ///
    /// With `B = QR` the dual form reduces to
    /// `F = R_a R^H (R R_a R^H + s2 I)^-1 Q^H`, an `N_a x N_a` solve that stays
    /// well conditioned as `s2 -> 0` whenever `R_a` is invertible.
    pub fn new(b: &BasisMatrix, r_a: &DMatrix<Complex64>, noise_variance: f64) -> Result<Self> {
        let n_a = b.n_a();
        if r_a.shape() != (n_a, n_a) {
            return Err(Error::InvalidDimension(format!(
                "R_a is {:?}, expected {n_a}x{n_a}",
                r_a.shape()
            )));
        }
        if noise_variance.is_nan() || noise_variance < 0.0 {
            return Err(Error::Parameter(format!(
                "noise variance {noise_variance} must be >= 0"
            )));
        }
        let (q, r) = b.qr_factors();
        let r_ra = r * r_a;
        let m = &r_ra * r.adjoint() + DMatrix::<Complex64>::identity(n_a, n_a) * Complex64::new(noise_variance, 0.0);
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = m.clone().symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        let solved = if lo > 1e-12 * hi.max(f64::MIN_POSITIVE) {
            m.clone()
                .cholesky()
                .map(|c| c.solve(&r_ra))
                .or_else(|| m.lu().solve(&r_ra))
        } else {
            None
        };
        match solved {
            // F^H = Q M^-1 R R_a
            Some(x) => Ok(Self {
                f: (q * x).adjoint(),
                fallback: false,
            }),
            None => {
                log::warn!("LMMSE-BEM regularizer is singular; falling back to LS-BEM");
                Ok(Self {
                    f: b.projector().clone(),
                    fallback: true,
                })
            }
        }
    }

    pub fn gain(&self) -> &DMatrix<Complex64> {
        &self.f
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    /// `a = F X^H y_p`, `h = B a`.
    pub fn estimate(&self, obs: &PilotObservation, b: &BasisMatrix, kind: EstimatorKind) -> Result<EstimateResult> {
        check_obs(obs, b)?;
        let a = if self.fallback {
            apply(&self.f, &ls_estimate(obs)?.h_pilot)
        } else {
            apply(&self.f, &obs.matched())
        };
        Ok(bem_result(kind, b, a))
    }
}

/// LMMSE-BEM in dual form, `a = R_a B^H (B R_a B^H + s2 I)^-1 X^H y_p`.
pub fn lmmse_bem_estimate(obs: &PilotObservation, b: &BasisMatrix, r_a: &DMatrix<Complex64>) -> Result<EstimateResult> {
    BemLmmseFilter::new(b, r_a, obs.noise_variance)?.estimate(obs, b, EstimatorKind::LmmseBem)
}

/// LMMSE-BEM in primal form, `a = (B^H B + s2 R_a^-1)^-1 B^H X^H y_p`.
/// Needs an invertible `R_a`.
pub fn lmmse_bem_primal(obs: &PilotObservation, b: &BasisMatrix, r_a: &DMatrix<Complex64>) -> Result<EstimateResult> {
    check_obs(obs, b)?;
    let bm = b.matrix();
    let r_inv = r_a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Decomposition("R_a is singular".into()))?;
    let lhs = bm.adjoint() * bm + r_inv * Complex64::new(obs.noise_variance, 0.0);
    let rhs = bm.adjoint() * DVector::from_column_slice(&obs.matched());
    let a = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Decomposition("primal LMMSE-BEM system is singular".into()))?;
    Ok(bem_result(EstimatorKind::LmmseBem, b, a.as_slice().to_vec()))
}

/// LMMSE-BEM with `R_a` derived from the approximated covariance.
pub fn almmse_bem_estimate(
    obs: &PilotObservation,
    b: &BasisMatrix,
    approx: &CovarianceMatrix,
) -> Result<EstimateResult> {
    if approx.kind() != CovarianceKind::Approximated {
        return Err(Error::Contract("aLMMSE-BEM needs the approximated covariance".into()));
    }
    let r_a = coefficient_covariance(approx, b)?;
    BemLmmseFilter::new(b, &r_a, obs.noise_variance)?.estimate(obs, b, EstimatorKind::AlmmseBem)
}
