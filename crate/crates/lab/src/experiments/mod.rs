//! The six experiments. Each returns its checks and tables; [`run`] wraps
//! them in a manifest and [`run_and_write`] persists the result.

mod decay_linear;
mod decay_nonlinear;
mod energy;
mod greens;
mod lp_selftest;
mod mach;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::manifest::{Check, RunManifest, WallClock};
use crate::output::{write_outputs, Table};

pub use decay_nonlinear::manufactured_orders;

#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
}

/// Run one experiment in memory.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<(RunManifest, Vec<Table>)> {
    cfg.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let report = match cfg.kind {
        ExperimentKind::GreensVerify => greens::run(cfg)?,
        ExperimentKind::DecayLinear => decay_linear::run(cfg)?,
        ExperimentKind::DecayNonlinear => decay_nonlinear::run(cfg)?,
        ExperimentKind::MachSweep => mach::run(cfg)?,
        ExperimentKind::EnergyCheck => energy::run(cfg)?,
        ExperimentKind::LpSelftest => lp_selftest::run(cfg)?,
    };
    let mut manifest = RunManifest::new(cfg.clone());
    manifest.checks = report.checks;
    manifest.warnings = report.warnings;
    manifest.outputs = report.tables.iter().map(Table::file_name).collect();
    manifest.wall_clock =
        Some(WallClock { started_unix_seconds: started, elapsed_seconds: clock.elapsed().as_secs_f64() });
    Ok((manifest, report.tables))
}

/// Run and write the manifest plus CSV tables into `dir`.
pub fn run_and_write(cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<RunManifest> {
    let (mut manifest, tables) = run(cfg)?;
    write_outputs(dir, &mut manifest, &tables)?;
    Ok(manifest)
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub(crate) fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| match i {
            0 => a,
            _ if i == n - 1 => b,
            _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Observed order from errors at step `h` and `h/2`; exact runs give `∞`.
pub(crate) fn observed_order(coarse: f64, fine: f64) -> f64 {
    if fine == 0.0 {
        if coarse == 0.0 { f64::INFINITY } else { f64::NAN }
    } else {
        (coarse / fine).log2()
    }
}
