use rayon::prelude::*;

use super::config::SimConfig;
use super::link::{Curve, CurveOutcome, Link};
use super::report::{SweepCell, SweepKind, SweepReport, SCHEMA_VERSION};
use crate::error::{Error, Result};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Default)]
struct Acc {
    trials: u64,
    mse: f64,
    mse_sq: f64,
    mse_full: f64,
    has_mse: bool,
    bit_errors: u64,
    bits: u64,
    done: bool,
}

impl Acc {
    fn add(&mut self, o: &CurveOutcome) {
        self.trials += 1;
        if let (Some(m), Some(f)) = (o.mse, o.mse_full) {
            self.has_mse = true;
            self.mse += m;
            self.mse_sq += m * m;
            self.mse_full += f;
        }
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.max(f64::MIN_POSITIVE).log10()
}

/// Pilot-grid MSE of every configured estimator over the Eb/N0 grid.
pub fn run_mse_sweep(config: &SimConfig) -> Result<SweepReport> {
    run_sweep(config, SweepKind::Mse)
}

/// BER (and MSE) of every configured estimator plus perfect CSI. An Eb/N0
/// point stops once each of its cells has `target_errors` errors and at least
/// `min_trials` trials, checked every `batch_size` trials.
pub fn run_ber_sweep(config: &SimConfig) -> Result<SweepReport> {
    run_sweep(config, SweepKind::Ber)
}

fn run_sweep(config: &SimConfig, kind: SweepKind) -> Result<SweepReport> {
    config.validate()?;
    let with_ber = kind == SweepKind::Ber;
    let link = Link::new(config, with_ber).map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = config.threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?
    };
    let n_curves = link.curves().len();
    let mut acc = vec![vec![Acc::default(); n_curves]; link.n_points()];

    let mut next = 0u64;
    while next < config.trials {
        let active: Vec<bool> = acc.iter().map(|cells| cells.first().is_some_and(|c| !c.done)).collect();
        if !active.iter().any(|a| *a) {
            break;
        }
        let end = (next + config.batch_size).min(config.trials);
        let outcomes: Vec<Result<_>> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|t| link.run_trial(t, &active))
                .collect()
        });
        for outcome in outcomes {
            for (cells, point) in acc.iter_mut().zip(outcome?) {
                if let Some(curves) = point {
                    for (cell, o) in cells.iter_mut().zip(&curves) {
                        if !cell.done {
                            cell.add(o);
                        }
                    }
                }
            }
        }
        next = end;
        if with_ber {
            // a point stops as a whole so every curve sees the same trials
            for cells in acc.iter_mut() {
                if cells
                    .iter()
                    .all(|c| c.trials >= config.min_trials && c.bit_errors >= config.target_errors)
                {
                    cells.iter_mut().for_each(|c| c.done = true);
                }
            }
        }
    }

    let mut cells = Vec::with_capacity(n_curves * link.n_points());
    for (ci, curve) in link.curves().iter().enumerate() {
        for (pi, &ebn0_db) in config.ebn0_grid_db.iter().enumerate() {
            cells.push(finish(config, kind, *curve, ebn0_db, &acc[pi][ci]));
        }
    }
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind,
        seed: config.master_seed,
        config: config.clone(),
        cells,
    })
}

fn finish(config: &SimConfig, kind: SweepKind, curve: Curve, ebn0_db: f64, a: &Acc) -> SweepCell {
    let n = a.trials.max(1) as f64;
    let (mse_db, mse_full_db, mse_ci) = if a.has_mse {
        let mean = a.mse / n;
        let var = (a.mse_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        let half = Z95 * (var / n).sqrt() / mean.max(f64::MIN_POSITIVE) * 10.0 / std::f64::consts::LN_10;
        (Some(db(mean)), Some(db(a.mse_full / n)), half)
    } else {
        (None, None, 0.0)
    };
    let (ber, ber_ci) = if kind == SweepKind::Ber && a.bits > 0 {
        let p = a.bit_errors as f64 / a.bits as f64;
        (Some(p), Z95 * (p * (1.0 - p) / a.bits as f64).sqrt())
    } else {
        (None, 0.0)
    };
    SweepCell {
        system: config.system,
        estimator: curve.label().to_string(),
        basis: config.basis,
        ebn0_db,
        mse_db,
        mse_full_db,
        ber,
        bit_errors: a.bit_errors,
        bits: a.bits,
        trials: a.trials,
        ci_halfwidth: if kind == SweepKind::Ber { ber_ci } else { mse_ci },
    }
}
