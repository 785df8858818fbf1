use std::path::PathBuf;
use std::process::ExitCode;

use bemsim::channel::DelayModel;
use bemsim::estimators::{BasisKind, EstimatorKind};
use bemsim::harness::{emit_report, run_ber_sweep, run_mse_sweep, ReportFormat, SimConfig};
use bemsim::waveforms::System;
use bemsim::Error;
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

/// Monte Carlo channel-estimation sweeps for OFDM and GFDM links.
#[derive(Parser)]
#[command(name = "sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized pilot-grid MSE per estimator.
    Mse(SweepArgs),
    /// BER per estimator plus a perfect-CSI reference.
    Ber(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, or `auto` to draw one.
    #[arg(long)]
    seed: String,
    #[arg(long)]
    out: PathBuf,
    /// Output format; inferred from the `--out` extension when omitted.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long)]
    system: Option<System>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Pilot spacing.
    #[arg(long)]
    ps: Option<usize>,
    /// Cyclic prefix length.
    #[arg(long)]
    cp: Option<usize>,
    /// RRC roll-off.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<usize>,
    /// BEM order.
    #[arg(long)]
    na: Option<usize>,
    /// Interference-cancellation sweeps.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    basis: Option<BasisKind>,
    /// Comma-separated estimator list.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<EstimatorKind>>,
    /// `start:step:stop` or a comma-separated list, in dB.
    #[arg(long)]
    ebn0: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    min_trials: Option<u64>,
    #[arg(long)]
    target_errors: Option<u64>,
    #[arg(long)]
    batch_size: Option<u64>,
    #[arg(long)]
    interp_taps: Option<usize>,
    /// `band-limited` or `exact-frequency`.
    #[arg(long)]
    delay_model: Option<String>,
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Config(format!("invalid Eb/N0 grid '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) = (
                start.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
                stop.trim().parse().map_err(|_| bad())?,
            );
            if step <= 0.0 || stop < start {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + step * i as f64).collect())
        }
        [list] => list.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

fn build_config(a: &SweepArgs) -> Result<SimConfig, Error> {
    let mut c = match &a.config {
        Some(path) => SimConfig::from_json_file(path)?,
        None => SimConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = a.$flag.clone() { c.$field = v; })*
        };
    }
    set!(system => system, k => k, m => m, ps => pilot_spacing, cp => cp_len, alpha => alpha,
        delta => delta, na => n_a, j => j_max, basis => basis, estimators => estimators,
        trials => trials, min_trials => min_trials, target_errors => target_errors,
        batch_size => batch_size);
    if let Some(g) = &a.ebn0 {
        c.ebn0_grid_db = parse_grid(g)?;
    }
    if a.interp_taps.is_some() {
        c.interp_taps = a.interp_taps;
    }
    if let Some(d) = &a.delay_model {
        c.channel.delay_model = serde_json::from_value::<DelayModel>(serde_json::Value::String(d.clone()))
            .map_err(|_| Error::Config(format!("unknown delay model '{d}'")))?;
    }
    c.master_seed = match a.seed.as_str() {
        "auto" => {
            let s = rand::random::<u64>();
            log::info!("using seed {s}");
            s
        }
        v => v
            .parse()
            .map_err(|_| Error::Config(format!("seed must be an integer or 'auto', got '{v}'")))?,
    };
    c.threads = a.threads;
    if c.min_trials > c.trials {
        c.min_trials = c.trials;
    }
    c.validate()?;
    Ok(c)
}

fn format_for(a: &SweepArgs) -> Result<ReportFormat, Error> {
    match &a.format {
        Some(f) => f.parse(),
        None => Ok(match a.out.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let (args, ber) = match &cli.command {
        Command::Mse(a) => (a, false),
        Command::Ber(a) => (a, true),
    };
    let config = build_config(args)?;
    let format = format_for(args)?;
    let report = if ber {
        run_ber_sweep(&config)?
    } else {
        run_mse_sweep(&config)?
    };
    emit_report(&report, format, &args.out)?;
    log::info!("wrote {} cells to {}", report.cells.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            })
        }
    }
}
