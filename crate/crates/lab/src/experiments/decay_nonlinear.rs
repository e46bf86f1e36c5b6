use nst_lab_core::integrator::{integrate, IntegratorConfig, TimeSeries};
use nst_lab_core::lp::FilterBank;
use nst_lab_core::nst::{
    density_diagnostic, energy_functionals, omega, tendency, total_mass, total_rho_theta, Coefficients,
    FluidParams, NstState, Part,
};
use nst_lab_core::{Grid, SpectralField};
use rayon::prelude::*;

use super::{observed_order, Report};
use crate::config::ExperimentConfig;
use crate::initial::initial_state;
use crate::manifest::{Check, Comparison};
use crate::output::{num, Table};

pub const CONSERVATION_TOL: f64 = 1e-8;
pub const DIAGNOSTIC_FACTOR: f64 = 2.0;
pub const ORDER_MIN: f64 = 1.9;
/// Relative growth of ‖u‖ or ‖z‖ between snapshots tolerated as roundoff.
pub const MONOTONE_SLACK: f64 = 1e-12;

pub(crate) fn integrator_config(cfg: &ExperimentConfig, dt: f64, track_omega: bool) -> IntegratorConfig {
    let steps = (cfg.time.dt / dt).round() as usize;
    IntegratorConfig {
        dt,
        t_end: cfg.time.t_end,
        cfl: cfg.time.cfl,
        snapshot_every: (cfg.time.snapshot_every * steps.max(1)).max(1),
        track_omega,
        dt_min: dt * 1e-6,
        ..Default::default()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Watch {
    mass0: f64,
    rho_theta0: f64,
    mass_drift: f64,
    rho_theta_drift: f64,
    diag_sup: f64,
    recovery_failed: bool,
}

fn omega_drift(series: &TimeSeries, gamma: f64) -> f64 {
    match (series.omega.last(), omega(series.last(), gamma)) {
        (Some(w), Ok(direct)) => w.sub(&direct).map(|d| d.l2_norm()).unwrap_or(f64::NAN),
        _ => f64::NAN,
    }
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let params = cfg.fluid_params()?;
    let coeffs = params.unscaled();
    let bank = FilterBank::covering(&grid, 4);
    let s0 = initial_state(&grid, &cfg.initial, cfg.seed);
    let diag0 = density_diagnostic(&bank, &s0);

    let levels: Vec<f64> =
        (0..=cfg.time.halvings).rev().map(|h| cfg.time.dt * (1u64 << h) as f64).collect();
    // the finest level is the main run and carries the diagnostics
    let runs: Vec<anyhow::Result<(TimeSeries, Option<Watch>)>> = levels
        .par_iter()
        .enumerate()
        .map(|(i, &dt)| {
            let main = i + 1 == levels.len();
            let mut watch = Watch::default();
            let mut first = true;
            let mut observer = |s: &NstState| {
                if !main {
                    return;
                }
                let mass = total_mass(s);
                let rt = total_rho_theta(s, &params);
                if first {
                    watch.mass0 = mass;
                    watch.rho_theta0 = rt.as_ref().copied().unwrap_or(f64::NAN);
                    first = false;
                }
                watch.mass_drift = watch.mass_drift.max(((mass - watch.mass0) / watch.mass0).abs());
                match rt {
                    Ok(rt) => {
                        watch.rho_theta_drift =
                            watch.rho_theta_drift.max(((rt - watch.rho_theta0) / watch.rho_theta0).abs())
                    }
                    Err(_) => watch.recovery_failed = true,
                }
                watch.diag_sup = watch.diag_sup.max(density_diagnostic(&bank, s));
            };
            let series = integrate(&s0, &coeffs, &integrator_config(cfg, dt, true), None, &mut observer)?;
            Ok((series, main.then_some(watch)))
        })
        .collect();
    let mut runs = runs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    let (main, watch) = runs.pop().expect("at least one level");
    let watch = watch.expect("main run is watched");
    let coarse: Vec<TimeSeries> = runs.into_iter().map(|(s, _)| s).collect();

    let mut report = Report::default();
    let failure = main.failure.as_ref().or_else(|| coarse.iter().find_map(|s| s.failure.as_ref()));
    report.checks.push(
        Check::flag("run_completed", failure.is_none(), main.last().time).with_detail(match failure {
            Some(e) => format!("aborted: {e}"),
            None => format!("reached t = {}", num(cfg.time.t_end)),
        }),
    );
    report.checks.push(
        Check::new("mass_conservation", watch.mass_drift, Comparison::AtMost, CONSERVATION_TOL)
            .with_detail("max relative drift of ∫ρ over every step"),
    );
    report.checks.push(
        Check::new("rho_theta_conservation", watch.rho_theta_drift, Comparison::AtMost, CONSERVATION_TOL)
            .with_detail(if watch.recovery_failed {
                "physical recovery failed at some step".to_string()
            } else {
                "max relative drift of ∫ρθ over every step".to_string()
            }),
    );
    let diag_ratio = match (diag0, watch.diag_sup) {
        (d, s) if d > 0.0 => s / d,
        (_, 0.0) => 0.0,
        _ => f64::INFINITY,
    };
    report.checks.push(
        Check::new("density_diagnostic_bound", diag_ratio, Comparison::AtMost, DIAGNOSTIC_FACTOR).with_detail(
            format!("sup_t ‖a(t)‖_{{Ḃ^{{d/2}}_{{2,1}}}} / ‖a₀‖_{{Ḃ^{{d/2}}_{{2,1}}}}, initial {}", num(diag0)),
        ),
    );

    let growth = |f: &dyn Fn(&NstState) -> f64| {
        main.times
            .iter()
            .zip(&main.states)
            .filter(|(t, _)| **t >= cfg.time.transient)
            .map(|(_, s)| f(s))
            .collect::<Vec<f64>>()
            .windows(2)
            .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(0.0, f64::max)
    };
    for (name, f) in [
        ("u_l2_nonincreasing", &(|s: &NstState| s.u.l2_norm()) as &dyn Fn(&NstState) -> f64),
        ("z_l2_nonincreasing", &|s: &NstState| s.z.l2_norm()),
    ] {
        report.checks.push(
            Check::new(name, growth(f), Comparison::AtMost, MONOTONE_SLACK).with_detail(format!(
                "largest relative growth between snapshots for t ≥ {}",
                num(cfg.time.transient)
            )),
        );
    }

    let mut drifts: Vec<f64> = coarse.iter().map(|s| omega_drift(s, coeffs.gamma)).collect();
    drifts.push(omega_drift(&main, coeffs.gamma));
    let omega_order = drifts.windows(2).map(|w| observed_order(w[0], w[1])).fold(f64::INFINITY, f64::min);
    report.checks.push(
        Check::new("omega_consistency_order", omega_order, Comparison::AtLeast, ORDER_MIN).with_detail(
            format!(
                "‖ω_transported − (γa − z)‖ at T for Δt = {:?}: {:?}",
                levels.iter().map(|v| num(*v)).collect::<Vec<_>>(),
                drifts.iter().map(|v| num(*v)).collect::<Vec<_>>()
            ),
        ),
    );

    let (ms_dts, ms_errs) = manufactured_errors(&grid, &coeffs)?;
    let ms_order = ms_errs.windows(2).map(|w| observed_order(w[0], w[1])).fold(f64::INFINITY, f64::min);
    report.checks.push(
        Check::new("manufactured_order", ms_order, Comparison::AtLeast, ORDER_MIN).with_detail(format!(
            "errors {:?} at Δt = {:?}",
            ms_errs.iter().map(|v| num(*v)).collect::<Vec<_>>(),
            ms_dts.iter().map(|v| num(*v)).collect::<Vec<_>>()
        )),
    );

    let f = energy_functionals(&bank, &main.times, &main.states)?;
    let kappa = if f.x0 > 0.0 { f.x / f.x0 } else if f.x == 0.0 { 0.0 } else { f64::INFINITY };
    report.checks.push(
        Check::flag("energy_constant", kappa.is_finite(), kappa)
            .with_detail(format!("𝒦 = 𝒳(T)/𝒳₀ with 𝒳₀ = {}, 𝒳(T) = {}", num(f.x0), num(f.x))),
    );

    let mut table = Table::new("nonlinear", &["t", "mass", "rho_theta", "a_diagnostic", "u_l2", "z_l2", "omega_drift"]);
    for (i, (t, s)) in main.times.iter().zip(&main.states).enumerate() {
        let w = main.omega.get(i).and_then(|w| omega(s, coeffs.gamma).and_then(|o| w.sub(&o)).ok());
        table.push_nums(&[
            *t,
            total_mass(s),
            total_rho_theta(s, &params).unwrap_or(f64::NAN),
            density_diagnostic(&bank, s),
            s.u.l2_norm(),
            s.z.l2_norm(),
            w.map(|d| d.l2_norm()).unwrap_or(f64::NAN),
        ]);
    }
    let mut orders = Table::new("orders", &["dt", "omega_drift"]);
    for (dt, e) in levels.iter().zip(&drifts) {
        orders.push_nums(&[*dt, *e]);
    }
    let mut ms = Table::new("manufactured", &["dt", "error"]);
    for (dt, e) in ms_dts.iter().zip(&ms_errs) {
        ms.push_nums(&[*dt, *e]);
    }
    report.tables.extend([table, orders, ms]);
    Ok(report)
}

/// Smooth reference state on the box, independent of the run's initial data.
fn manufactured_base(grid: &Grid) -> NstState {
    let k = std::f64::consts::TAU / grid.length();
    let d = grid.dim();
    let a = SpectralField::scalar_from_fn(grid, |x| 0.1 * (k * x[0]).sin() * (k * x[1]).cos());
    let u = SpectralField::from_fn(grid, d, |x, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 0.2 * (k * (x[0] + x[1])).cos();
        out[1] = 0.1 * (2.0 * k * x[0]).sin();
    });
    let z = SpectralField::scalar_from_fn(grid, |x| 0.1 * (k * x[1]).cos());
    NstState::new(a, u, z, 0.0).expect("fields share the grid")
}

/// Errors at `t = 1` against `S*(t) = (1 + ½ sin t) S₀` forced by `∂tS* − rhs(S*)`.
fn manufactured_errors(grid: &Grid, coeffs: &Coefficients) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let base = manufactured_base(grid);
    let exact = |t: f64| {
        let mut s = base.scaled(1.0 + 0.5 * t.sin());
        s.time = t;
        s
    };
    let dts = vec![0.04, 0.02, 0.01];
    let errs = dts
        .par_iter()
        .map(|&dt| {
            let forcing = |t: f64| base.scaled(0.5 * t.cos()).axpy(-1.0, &tendency(&exact(t), coeffs, Part::Full)?);
            let cfg = IntegratorConfig { dt, t_end: 1.0, snapshot_every: 1000, ..Default::default() };
            let series = integrate(&exact(0.0), coeffs, &cfg, Some(&forcing), &mut |_| {})?;
            if let Some(e) = series.failure {
                return Err(e.into());
            }
            Ok(series.last().distance(&exact(1.0))?)
        })
        .collect::<anyhow::Result<Vec<f64>>>()?;
    Ok((dts, errs))
}

/// Observed manufactured-solution orders for given fluid coefficients on a grid.
pub fn manufactured_orders(grid: &Grid, params: &FluidParams) -> anyhow::Result<Vec<f64>> {
    let (_, errs) = manufactured_errors(grid, &params.unscaled())?;
    Ok(errs.windows(2).map(|w| observed_order(w[0], w[1])).collect())
}
