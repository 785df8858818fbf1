use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::waveforms::WaveformParams;

/// Relative size of the smallest `R` diagonal entry below which a basis is
/// treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// Complex exponentials, i.e. integer delays `0..N_a`.
    Ce,
    /// Legendre polynomials in frequency.
    Lp,
}

impl BasisKind {
    pub fn label(self) -> &'static str {
        match self {
            BasisKind::Ce => "ce",
            BasisKind::Lp => "lp",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ce" => Ok(BasisKind::Ce),
            "lp" => Ok(BasisKind::Lp),
            other => Err(Error::Config(format!("unknown basis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Pilot,
    Full,
}

/// Full-column-rank basis with its least-squares projector.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    b: DMatrix<Complex64>,
    kind: BasisKind,
    grid: GridKind,
    q: DMatrix<Complex64>,
    r: DMatrix<Complex64>,
    projector: DMatrix<Complex64>,
    condition: f64,
}

impl BasisMatrix {
    /// Factors `b = QR` and caches `(B^H B)^-1 B^H = R^-1 Q^H`.
    pub fn new(b: DMatrix<Complex64>, kind: BasisKind, grid: GridKind) -> Result<Self> {
        let (rows, cols) = b.shape();
        if cols == 0 || cols > rows {
            return Err(Error::InvalidDimension(format!(
                "basis of {cols} functions on {rows} rows is overdetermined"
            )));
        }
        let qr = b.clone().qr();
        let r = qr.r();
        let diag: Vec<f64> = (0..cols).map(|i| r[(i, i)].norm()).collect();
        let big = diag.iter().copied().fold(0.0, f64::max);
        let small = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if small.is_nan() || small <= RANK_TOL * big {
            return Err(Error::Decomposition(format!(
                "basis is rank deficient (|R_ii| ratio {:.3e})",
                small / big
            )));
        }
        let q = qr.q();
        let projector = r
            .solve_upper_triangular(&q.adjoint())
            .ok_or_else(|| Error::Decomposition("triangular solve failed".into()))?;
        let sv = b.clone().singular_values();
        let condition = sv.max() / sv.min();
        log::debug!("{} basis {rows}x{cols}: condition number {condition:.3e}", kind.label());
        Ok(Self {
            b,
            kind,
            grid,
            q,
            r,
            projector,
            condition,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn grid(&self) -> GridKind {
        self.grid
    }

    /// `(B^H B)^-1 B^H`.
    pub fn projector(&self) -> &DMatrix<Complex64> {
        &self.projector
    }

    /// Thin QR factors, `B = Q R` with orthonormal `Q`.
    pub fn qr_factors(&self) -> (&DMatrix<Complex64>, &DMatrix<Complex64>) {
        (&self.q, &self.r)
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn rows(&self) -> usize {
        self.b.nrows()
    }

    pub fn n_a(&self) -> usize {
        self.b.ncols()
    }
}

fn check_dims(n_rows: usize, n_a: usize) -> Result<()> {
    if n_a == 0 || n_a > n_rows {
        return Err(Error::InvalidDimension(format!("N_a={n_a} must lie in 1..={n_rows}")));
    }
    Ok(())
}

/// `exp(-j 2 pi f t)` with `f = num/den` reduced exactly before the angle.
fn ce_entry(num: usize, t: usize, den: usize) -> Complex64 {
    let idx = (num as u128 * t as u128 % den as u128) as f64;
    Complex64::from_polar(1.0, -2.0 * PI * idx / den as f64)
}

/// Raw complex-exponential basis matrix.
///
/// Pilot grid: `B(q,t) = exp(-j 2 pi p_s q t / K)` for pilot index
/// `q = 0..n_rows` and delay `t = 0..n_a`. Full grid: `n_rows` uniformly
/// spaced bins covering one period, `B(b,t) = exp(-j 2 pi b t / n_rows)`, so
/// every pilot row coincides with the pilot-grid row.
pub fn ce_matrix(
    n_rows: usize,
    n_a: usize,
    pilot_spacing: usize,
    k: usize,
    grid: GridKind,
) -> Result<DMatrix<Complex64>> {
    check_dims(n_rows, n_a)?;
    Ok(match grid {
        GridKind::Pilot => DMatrix::from_fn(n_rows, n_a, |q, t| ce_entry(pilot_spacing * q, t, k)),
        GridKind::Full => DMatrix::from_fn(n_rows, n_a, |b, t| ce_entry(b, t, n_rows)),
    })
}

pub fn ce_basis(n_rows: usize, n_a: usize, pilot_spacing: usize, k: usize, grid: GridKind) -> Result<BasisMatrix> {
    BasisMatrix::new(ce_matrix(n_rows, n_a, pilot_spacing, k, grid)?, BasisKind::Ce, grid)
}

/// `P_0..P_{n-1}` at `x` by the three-term recurrence.
pub fn legendre_values(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut prev, mut cur) = (0.0, 1.0);
    for t in 0..n {
        out.push(cur);
        let next = ((2 * t + 1) as f64 * x * cur - t as f64 * prev) / (t + 1) as f64;
        prev = cur;
        cur = next;
    }
    out
}

/// Raw Legendre basis matrix.
///
/// Pilot `q` sits at `x = -1 + 2q/(N_p - 1)`. On the full grid bin `b` of
/// `n_rows` is mapped with the same affine law at fractional pilot index
/// `b N_p / n_rows`, so the pilots coincide and bins past the last pilot lie
/// slightly beyond `x = 1`.
pub fn lp_matrix(n_rows: usize, n_a: usize, n_pilots: usize, grid: GridKind) -> Result<DMatrix<Complex64>> {
    check_dims(n_rows, n_a)?;
    if n_pilots < 2 {
        return Err(Error::InvalidDimension(
            "Legendre basis needs at least two pilots".into(),
        ));
    }
    let span = (n_pilots - 1) as f64;
    let x_of = |row: usize| match grid {
        GridKind::Pilot => -1.0 + 2.0 * row as f64 / span,
        GridKind::Full => -1.0 + 2.0 * (row as f64 * n_pilots as f64 / n_rows as f64) / span,
    };
    let mut m = DMatrix::zeros(n_rows, n_a);
    for row in 0..n_rows {
        for (t, v) in legendre_values(x_of(row), n_a).into_iter().enumerate() {
            m[(row, t)] = Complex64::new(v, 0.0);
        }
    }
    Ok(m)
}

pub fn lp_basis(n_rows: usize, n_a: usize, n_pilots: usize, grid: GridKind) -> Result<BasisMatrix> {
    BasisMatrix::new(lp_matrix(n_rows, n_a, n_pilots, grid)?, BasisKind::Lp, grid)
}

/// Pilot and full-grid bases sharing one coefficient space.
///
/// The pilot basis is sliced out of the full-grid matrix so both evaluate
/// identically at the pilot bins. Legendre columns are orthonormalized on the
/// pilot grid (`raw = QR`, both grids right-multiplied by `R^-1`), which
/// keeps the span and fixes the conditioning.
#[derive(Debug, Clone)]
pub struct BemDesign {
    pub pilot: BasisMatrix,
    pub full: DMatrix<Complex64>,
    pub pilot_bins: Vec<usize>,
}

impl BemDesign {
    pub fn new(params: &WaveformParams, n_a: usize, kind: BasisKind) -> Result<Self> {
        let g = params.grid_size();
        let n_p = params.n_pilots();
        check_dims(n_p, n_a)?;
        let full = match kind {
            BasisKind::Ce => ce_matrix(g, n_a, params.pilot_spacing, params.k, GridKind::Full)?,
            BasisKind::Lp => {
                let raw_full = lp_matrix(g, n_a, n_p, GridKind::Full)?;
                let raw_pilot = slice_rows(&raw_full, &params.pilot_bins);
                let r = raw_pilot.qr().r();
                let r_inv = r
                    .try_inverse()
                    .ok_or_else(|| Error::Decomposition("Legendre pilot basis is rank deficient".into()))?;
                // R^-1 of a real matrix is real; drop rounding residue so entries stay real
                (raw_full * r_inv).map(|z| Complex64::new(z.re, 0.0))
            }
        };
        let pilot = BasisMatrix::new(slice_rows(&full, &params.pilot_bins), kind, GridKind::Pilot)?;
        Ok(Self {
            pilot,
            full,
            pilot_bins: params.pilot_bins.clone(),
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.pilot.kind()
    }

    pub fn n_a(&self) -> usize {
        self.pilot.n_a()
    }
}

pub(crate) fn slice_rows(m: &DMatrix<Complex64>, rows: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}
