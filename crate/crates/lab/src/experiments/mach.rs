use nst_lab_core::fit::fit_loglog;
use nst_lab_core::inns::{integrate_inns, InnsState};
use nst_lab_core::integrator::{integrate, IntegratorConfig};
use nst_lab_core::lp::{lp_norm_physical, Integrability};
use nst_lab_core::nst::{omega, FluidParams, NstState};
use nst_lab_core::{DerivativeKind, SpectralField};
use rayon::prelude::*;

use super::Report;
use crate::config::ExperimentConfig;
use crate::initial::initial_state;
use crate::manifest::{Check, Comparison};
use crate::output::{num, Table};

pub const CONSISTENCY_TOL: f64 = 1e-10;

/// `L²` gaps at `T` for one Mach number.
#[derive(Debug, Clone, Copy)]
pub struct MachPoint {
    pub eps: f64,
    pub z: f64,
    pub div_u: f64,
    pub velocity_gap: f64,
    pub omega_gap: f64,
}

fn l2(f: &SpectralField) -> f64 {
    lp_norm_physical(f, Integrability::Two)
}

fn run_config(cfg: &ExperimentConfig) -> IntegratorConfig {
    IntegratorConfig {
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        cfl: cfg.time.cfl,
        snapshot_every: cfg.time.snapshot_every,
        dt_min: cfg.time.dt * 1e-6,
        ..Default::default()
    }
}

fn final_state(s0: &NstState, params: &FluidParams, scaled: bool, ic: &IntegratorConfig) -> anyhow::Result<NstState> {
    let coeffs = if scaled { params.scaled() } else { params.unscaled() };
    let series = integrate(s0, &coeffs, ic, None, &mut |_| {})?;
    if let Some(e) = series.failure {
        anyhow::bail!("ε = {} stopped early: {e}", params.mach);
    }
    Ok(series.last().clone())
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let m = &cfg.mach;
    let fluid = cfg.fluid_params()?;
    let gamma = fluid.gamma;
    let s0 = initial_state(&grid, &cfg.initial, cfg.seed);
    let ic = run_config(cfg);

    let reference = InnsState::new(omega(&s0, gamma)?, s0.u.leray()?, 0.0)?;
    let inns = integrate_inns(&reference, m.mu_bar, &ic)?;
    if let Some(e) = &inns.failure {
        anyhow::bail!("incompressible reference stopped early: {e}");
    }
    let target = inns.last();

    let points = m
        .eps
        .par_iter()
        .map(|&eps| {
            let p = fluid.with_mach(eps, m.mu_bar, m.lambda_bar)?;
            let s = final_state(&s0, &p, true, &ic)?;
            Ok(MachPoint {
                eps,
                z: l2(&s.z),
                div_u: l2(&s.u.derivative(DerivativeKind::Divergence)?),
                velocity_gap: l2(&s.u.leray()?.sub(&target.v)?),
                omega_gap: l2(&omega(&s, gamma)?.sub(&target.rho)?),
            })
        })
        .collect::<anyhow::Result<Vec<MachPoint>>>()?;

    // ε = 1 must reproduce the unscaled solver with μ = μ̄, λ = λ̄.
    let unit = fluid.with_mach(1.0, m.mu_bar, m.lambda_bar)?;
    let plain = FluidParams { mu: m.mu_bar, lambda: m.lambda_bar, ..unit };
    let (a, b) = rayon::join(|| final_state(&s0, &unit, true, &ic), || final_state(&s0, &plain, false, &ic));
    let consistency = a?.distance(&b?)?;

    let mut report = Report::default();
    report.checks.push(
        Check::new("unit_mach_consistency", consistency, Comparison::AtMost, CONSISTENCY_TOL)
            .with_detail("‖S_ε=1(T) − S_unscaled(T)‖ with μ = μ̄, λ = λ̄"),
    );

    let mut order: Vec<MachPoint> = points.clone();
    order.sort_by(|x, y| y.eps.total_cmp(&x.eps));
    type Pick = fn(&MachPoint) -> f64;
    let series: [(&str, &str, Pick); 4] = [
        ("z", "‖z^ε(T)‖_{L²}", |p| p.z),
        ("div_u", "‖div u^ε(T)‖_{L²}", |p| p.div_u),
        ("velocity_gap", "‖ℙu^ε(T) − v(T)‖_{L²}", |p| p.velocity_gap),
        ("omega_gap", "‖ω^ε(T) − ϱ(T)‖_{L²}", |p| p.omega_gap),
    ];
    let reference_slope = 0.5 - 1.0 / m.reference_p;
    for (name, label, pick) in series {
        let values: Vec<f64> = order.iter().map(pick).collect();
        // largest ratio between consecutive values as ε decreases; below 1 means strictly decreasing
        let worst = values
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::INFINITY })
            .fold(0.0, f64::max);
        report.checks.push(
            Check::new(&format!("{name}_decreasing"), worst, Comparison::Below, 1.0).with_detail(format!(
                "{label} for ε = {:?}: {:?}",
                order.iter().map(|p| num(p.eps)).collect::<Vec<_>>(),
                values.iter().map(|v| num(*v)).collect::<Vec<_>>()
            )),
        );
        let eps: Vec<f64> = order.iter().map(|p| p.eps).collect();
        match fit_loglog(&eps, &values) {
            Ok(fit) => report.checks.push(Check::flag(&format!("{name}_eps_slope"), true, fit.slope).with_detail(
                format!("fitted exponent of {label} in ε; reference 1/2 − 1/p = {}", num(reference_slope)),
            )),
            Err(e) => report.warnings.push(format!("{name}: no ε-slope ({e})")),
        }
    }

    let mut table = Table::new("mach", &["eps", "z_l2", "div_u_l2", "velocity_gap", "omega_gap"]);
    for p in &order {
        table.push_nums(&[p.eps, p.z, p.div_u, p.velocity_gap, p.omega_gap]);
    }
    report.tables.push(table);
    Ok(report)
}
