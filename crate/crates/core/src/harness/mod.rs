//! Seeded Monte Carlo sweeps and report emission.
//!
//! Every trial draws its channel, data and unit noise from streams keyed by
//! `(master_seed, trial)`, and the same noise realization is rescaled for every
//! Eb/N0 point. Trials run in parallel but are reduced in index order, so a
//! report depends only on the configuration.

mod config;
mod link;
mod report;
mod sweep;

pub use config::{ebn0_to_noise_variance, ChannelProfile, SimConfig};
pub use link::{Curve, CurveOutcome, Link};
pub use report::{emit_report, ReportFormat, SweepCell, SweepKind, SweepReport, CSV_HEADER, SCHEMA_VERSION};
pub use sweep::{run_ber_sweep, run_mse_sweep};
