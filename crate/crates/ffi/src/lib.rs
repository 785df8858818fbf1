//! C ABI for the simulator.
//!
//! All objects are opaque handles created and destroyed through this API.
//! Every fallible call returns a [`BemsimStatus`]; on failure the message is
//! kept per thread and can be read with [`bemsim_last_error_message`].
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use bemsim::channel::true_pilot_covariance;
use bemsim::estimators::{BasisKind, EstimatorBank, EstimatorKind, PilotObservation};
use bemsim::harness::{
    ebn0_to_noise_variance, emit_report, run_ber_sweep, run_mse_sweep, ReportFormat, SimConfig, SweepReport,
};
use bemsim::waveforms::{System, WaveformParams};
use bemsim::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Numeric = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemsimSystem {
    Ofdm = 0,
    Gfdm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemsimBasis {
    Ce = 0,
    Lp = 1,
}

/// Estimator kinds; `Perfect` only appears in BER report cells.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemsimCurve {
    Ls = 0,
    Lmmse = 1,
    LsBem = 2,
    LmmseBem = 3,
    AlmmseBem = 4,
    Perfect = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemsimFormat {
    Csv = 0,
    Json = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BemsimComplex {
    pub re: f64,
    pub im: f64,
}

/// One report cell. Metrics that were not measured are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BemsimCell {
    pub curve: BemsimCurve,
    pub ebn0_db: f64,
    pub mse_db: f64,
    pub mse_full_db: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub trials: u64,
    pub ci_halfwidth: f64,
}

/// Simulation configuration.
pub struct BemsimConfig(SimConfig);

/// Completed sweep.
pub struct BemsimReport(SweepReport);

/// Estimator prepared for one configuration and Eb/N0.
pub struct BemsimEstimator {
    bank: EstimatorBank,
    kind: EstimatorKind,
    pilots: usize,
    grid: usize,
    noise_variance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(BemsimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) | Error::Json(_) => BemsimStatus::Config,
            Error::Io { .. } => BemsimStatus::Io,
            Error::Decomposition(_) | Error::ModelViolation(_) => BemsimStatus::Numeric,
            _ => BemsimStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(BemsimStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BemsimStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (BemsimStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(_) => (BemsimStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(BemsimStatus::NullPointer, "null handle".into()))
}

unsafe fn get_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(BemsimStatus::NullPointer, "null handle".into()))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(BemsimStatus::NullPointer, "null output pointer".into()))
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(BemsimStatus::NullPointer, "null array".into()));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(BemsimStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("string is not UTF-8"))
}

fn kind_of(c: BemsimCurve) -> Result<EstimatorKind, Failure> {
    Ok(match c {
        BemsimCurve::Ls => EstimatorKind::Ls,
        BemsimCurve::Lmmse => EstimatorKind::Lmmse,
        BemsimCurve::LsBem => EstimatorKind::LsBem,
        BemsimCurve::LmmseBem => EstimatorKind::LmmseBem,
        BemsimCurve::AlmmseBem => EstimatorKind::AlmmseBem,
        BemsimCurve::Perfect => return Err(invalid("perfect CSI is not an estimator")),
    })
}

fn curve_of(label: &str) -> BemsimCurve {
    match label.parse::<EstimatorKind>() {
        Ok(EstimatorKind::Ls) => BemsimCurve::Ls,
        Ok(EstimatorKind::Lmmse) => BemsimCurve::Lmmse,
        Ok(EstimatorKind::LsBem) => BemsimCurve::LsBem,
        Ok(EstimatorKind::LmmseBem) => BemsimCurve::LmmseBem,
        Ok(EstimatorKind::AlmmseBem) => BemsimCurve::AlmmseBem,
        Err(_) => BemsimCurve::Perfect,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes) and returns the full message
/// length in bytes. Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a configuration holding the reference defaults.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_new(out: *mut *mut BemsimConfig) -> BemsimStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = Box::into_raw(Box::new(BemsimConfig(SimConfig::default())));
        Ok(())
    })
}

/// Parses a JSON configuration; missing fields take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_from_json(json: *const c_char, out: *mut *mut BemsimConfig) -> BemsimStatus {
    guard(|| {
        let cfg = SimConfig::from_json_str(string(json)?)?;
        let out = out_ptr(out)?;
        *out = Box::into_raw(Box::new(BemsimConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_free(config: *mut BemsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets the system and frame geometry.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_set_frame(
    config: *mut BemsimConfig,
    system: BemsimSystem,
    k: usize,
    m: usize,
    pilot_spacing: usize,
    cp_len: usize,
    alpha: f64,
) -> BemsimStatus {
    guard(|| {
        let c = &mut get_mut(config)?.0;
        c.system = match system {
            BemsimSystem::Ofdm => System::Ofdm,
            BemsimSystem::Gfdm => System::Gfdm,
        };
        c.k = k;
        c.m = m;
        c.pilot_spacing = pilot_spacing;
        c.cp_len = cp_len;
        c.alpha = alpha;
        Ok(())
    })
}

/// Sets the BEM basis and order.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_set_basis(
    config: *mut BemsimConfig,
    basis: BemsimBasis,
    n_a: usize,
) -> BemsimStatus {
    guard(|| {
        let c = &mut get_mut(config)?.0;
        c.basis = match basis {
            BemsimBasis::Ce => BasisKind::Ce,
            BemsimBasis::Lp => BasisKind::Lp,
        };
        c.n_a = n_a;
        Ok(())
    })
}

/// Replaces the estimator list.
///
/// # Safety
/// `config` must be a live handle and `kinds` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_set_estimators(
    config: *mut BemsimConfig,
    kinds: *const BemsimCurve,
    len: usize,
) -> BemsimStatus {
    guard(|| {
        let list = slice(kinds, len)?
            .iter()
            .map(|&k| kind_of(k))
            .collect::<Result<Vec<_>, _>>()?;
        get_mut(config)?.0.estimators = list;
        Ok(())
    })
}

/// Replaces the Eb/N0 grid (dB).
///
/// # Safety
/// `config` must be a live handle and `grid` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_set_ebn0_grid(
    config: *mut BemsimConfig,
    grid: *const f64,
    len: usize,
) -> BemsimStatus {
    guard(|| {
        let g = slice(grid, len)?.to_vec();
        get_mut(config)?.0.ebn0_grid_db = g;
        Ok(())
    })
}

/// Sets the trial budget, master seed and worker count (0 = all cores).
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_set_run(
    config: *mut BemsimConfig,
    trials: u64,
    min_trials: u64,
    master_seed: u64,
    threads: usize,
) -> BemsimStatus {
    guard(|| {
        let c = &mut get_mut(config)?.0;
        c.trials = trials;
        c.min_trials = min_trials;
        c.master_seed = master_seed;
        c.threads = (threads > 0).then_some(threads);
        Ok(())
    })
}

/// Checks the configuration without running anything.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bemsim_config_validate(config: *const BemsimConfig) -> BemsimStatus {
    guard(|| Ok(get(config)?.0.validate()?))
}

unsafe fn run(
    config: *const BemsimConfig,
    out: *mut *mut BemsimReport,
    sweep: fn(&SimConfig) -> bemsim::Result<SweepReport>,
) -> BemsimStatus {
    guard(|| {
        let report = sweep(&get(config)?.0)?;
        let out = out_ptr(out)?;
        *out = Box::into_raw(Box::new(BemsimReport(report)));
        Ok(())
    })
}

/// Runs an MSE sweep.
///
/// # Safety
/// `config` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_run_mse(config: *const BemsimConfig, out: *mut *mut BemsimReport) -> BemsimStatus {
    run(config, out, run_mse_sweep)
}

/// Runs a BER sweep, which adds a perfect-CSI curve.
///
/// # Safety
/// `config` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_run_ber(config: *const BemsimConfig, out: *mut *mut BemsimReport) -> BemsimStatus {
    run(config, out, run_ber_sweep)
}

/// # Safety
/// `report` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bemsim_report_free(report: *mut BemsimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_report_cell_count(report: *const BemsimReport, out: *mut usize) -> BemsimStatus {
    guard(|| {
        let n = get(report)?.0.cells.len();
        *out_ptr(out)? = n;
        Ok(())
    })
}

/// Reads cell `index`, ordered by curve and then Eb/N0.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_report_cell(
    report: *const BemsimReport,
    index: usize,
    out: *mut BemsimCell,
) -> BemsimStatus {
    guard(|| {
        let cells = &get(report)?.0.cells;
        let c = cells
            .get(index)
            .ok_or_else(|| invalid(format!("cell {index} out of range ({} cells)", cells.len())))?;
        *out_ptr(out)? = BemsimCell {
            curve: curve_of(&c.estimator),
            ebn0_db: c.ebn0_db,
            mse_db: c.mse_db.unwrap_or(f64::NAN),
            mse_full_db: c.mse_full_db.unwrap_or(f64::NAN),
            ber: c.ber.unwrap_or(f64::NAN),
            bit_errors: c.bit_errors,
            bits: c.bits,
            trials: c.trials,
            ci_halfwidth: c.ci_halfwidth,
        };
        Ok(())
    })
}

/// Writes the report as CSV or JSON.
///
/// # Safety
/// `report` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bemsim_report_write(
    report: *const BemsimReport,
    path: *const c_char,
    format: BemsimFormat,
) -> BemsimStatus {
    guard(|| {
        let fmt = match format {
            BemsimFormat::Csv => ReportFormat::Csv,
            BemsimFormat::Json => ReportFormat::Json,
        };
        Ok(emit_report(&get(report)?.0, fmt, Path::new(string(path)?))?)
    })
}

/// Prepares one estimator for `config`'s frame, channel profile and basis at
/// `ebn0_db`.
///
/// # Safety
/// `config` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_estimator_new(
    config: *const BemsimConfig,
    kind: BemsimCurve,
    ebn0_db: f64,
    out: *mut *mut BemsimEstimator,
) -> BemsimStatus {
    guard(|| {
        let c = &get(config)?.0;
        let kind = kind_of(kind)?;
        c.validate()?;
        let params: WaveformParams = c.waveform_params()?;
        let true_cov = true_pilot_covariance(&c.channel_spec()?, &params)?;
        let noise_variance = ebn0_to_noise_variance(ebn0_db, c) / params.pilot_gain.norm_sqr();
        let bank = EstimatorBank::new(
            &params,
            c.basis,
            c.n_a,
            c.interp_taps(),
            noise_variance,
            &true_cov,
            &[kind],
        )?;
        let out = out_ptr(out)?;
        *out = Box::into_raw(Box::new(BemsimEstimator {
            bank,
            kind,
            pilots: params.n_pilots(),
            grid: params.grid_size(),
            noise_variance,
        }));
        Ok(())
    })
}

/// # Safety
/// `estimator` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bemsim_estimator_free(estimator: *mut BemsimEstimator) {
    if !estimator.is_null() {
        drop(Box::from_raw(estimator));
    }
}

/// Number of pilots and full-grid bins the estimator works on.
///
/// # Safety
/// `estimator` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_estimator_dims(
    estimator: *const BemsimEstimator,
    n_pilots: *mut usize,
    grid_size: *mut usize,
) -> BemsimStatus {
    guard(|| {
        let e = get(estimator)?;
        *out_ptr(n_pilots)? = e.pilots;
        *out_ptr(grid_size)? = e.grid;
        Ok(())
    })
}

/// Estimates the full-grid channel response from received pilots `y` and
/// transmitted unit-modulus pilots `x` (both `n_pilots` long, gain removed).
///
/// # Safety
/// `estimator` must be a live handle, `y` and `x` valid for `n_pilots`
/// reads and `h_full` valid for `grid_size` writes.
#[no_mangle]
pub unsafe extern "C" fn bemsim_estimator_run(
    estimator: *const BemsimEstimator,
    y: *const BemsimComplex,
    x: *const BemsimComplex,
    n_pilots: usize,
    h_full: *mut BemsimComplex,
    grid_size: usize,
) -> BemsimStatus {
    guard(|| {
        let e = get(estimator)?;
        if n_pilots != e.pilots || grid_size != e.grid {
            return Err(invalid(format!(
                "expected {} pilots and {} bins, got {n_pilots} and {grid_size}",
                e.pilots, e.grid
            )));
        }
        let conv = |v: &[BemsimComplex]| v.iter().map(|z| Complex64::new(z.re, z.im)).collect::<Vec<_>>();
        let obs = PilotObservation::new(conv(slice(y, n_pilots)?), conv(slice(x, n_pilots)?), e.noise_variance)?;
        let h = e.bank.estimate_full(e.kind, &obs)?.h_full.unwrap_or_default();
        if h_full.is_null() {
            return Err(Failure(BemsimStatus::NullPointer, "null output array".into()));
        }
        let out = std::slice::from_raw_parts_mut(h_full, grid_size);
        for (o, v) in out.iter_mut().zip(&h) {
            *o = BemsimComplex { re: v.re, im: v.im };
        }
        Ok(())
    })
}
