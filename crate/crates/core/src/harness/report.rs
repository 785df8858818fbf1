use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use super::config::SimConfig;
use crate::error::{Error, Result};
use crate::estimators::BasisKind;
use crate::waveforms::System;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "system,estimator,basis,ebn0_db,mse_db,ber,trials,ci_halfwidth,seed,mse_full_db";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Mse,
    Ber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// Metrics of one (curve, Eb/N0) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub system: System,
    pub estimator: String,
    pub basis: BasisKind,
    pub ebn0_db: f64,
    /// `10 log10` of the mean per-trial normalized pilot MSE.
    pub mse_db: Option<f64>,
    pub mse_full_db: Option<f64>,
    pub ber: Option<f64>,
    pub bit_errors: u64,
    pub bits: u64,
    pub trials: u64,
    /// 95% half-width: in dB for MSE sweeps, absolute for BER sweeps.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub version: String,
    pub kind: SweepKind,
    pub seed: u64,
    pub config: SimConfig,
    pub cells: Vec<SweepCell>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.system.label(),
                c.estimator,
                c.basis.label(),
                c.ebn0_db,
                opt(c.mse_db),
                opt(c.ber),
                c.trials,
                c.ci_halfwidth,
                self.seed,
                opt(c.mse_full_db)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Cells of one curve in grid order.
    pub fn curve(&self, estimator: &str) -> Vec<&SweepCell> {
        self.cells.iter().filter(|c| c.estimator == estimator).collect()
    }

    pub fn cell(&self, estimator: &str, ebn0_db: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && (c.ebn0_db - ebn0_db).abs() < 1e-9)
    }

    /// Eb/N0 at which a curve's BER first falls to `target`, interpolating
    /// `log10(BER)` linearly between grid points.
    pub fn ber_crossing_db(&self, estimator: &str, target: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .curve(estimator)
            .iter()
            .filter_map(|c| c.ber.filter(|b| *b > 0.0).map(|b| (c.ebn0_db, b.log10())))
            .collect();
        let t = target.log10();
        pts.windows(2).find_map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y0 >= t && y1 <= t && y0 != y1 {
                Some(x0 + (t - y0) * (x1 - x0) / (y1 - y0))
            } else {
                None
            }
        })
    }

    /// Horizontal distance `crossing(b) - crossing(a)` at `target` BER.
    pub fn ber_gap_db(&self, a: &str, b: &str, target: f64) -> Option<f64> {
        Some(self.ber_crossing_db(b, target)? - self.ber_crossing_db(a, target)?)
    }
}

/// Writes `report` to `path`.
pub fn emit_report(report: &SweepReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json()?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
