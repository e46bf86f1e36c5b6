use nst_lab_core::integrator::{integrate, IntegratorConfig};
use nst_lab_core::lp::{trapezoid, FilterBank};
use nst_lab_core::nst::{energy_functionals, Coefficients, Functionals, NstState};
use nst_lab_core::DerivativeKind;

use super::Report;
use crate::config::ExperimentConfig;
use crate::initial::initial_state;
use crate::manifest::{Check, Comparison};
use crate::output::{num, Table};

pub const IDENTITY_TOL: f64 = 1e-4;
pub const MONOTONE_SLACK: f64 = 1e-12;

/// `‖u‖² + ‖z‖²/γ`, conserved up to dissipation by the linear system.
pub fn linear_energy(s: &NstState, gamma: f64) -> f64 {
    s.u.l2_norm_sq() + s.z.l2_norm_sq() / gamma
}

/// `2(μ‖∇u‖² + (μ+λ)‖div u‖²)`.
pub fn dissipation_rate(s: &NstState, c: &Coefficients) -> f64 {
    let grad = s.u.derivative(DerivativeKind::Gradient).map(|g| g.l2_norm_sq()).unwrap_or(f64::NAN);
    let div = s.u.derivative(DerivativeKind::Divergence).map(|g| g.l2_norm_sq()).unwrap_or(f64::NAN);
    2.0 * (c.mu * grad + (c.mu + c.lambda) * div)
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let coeffs = cfg.fluid_params()?.unscaled();
    let s0 = initial_state(&grid, &cfg.initial, cfg.seed);
    let base = IntegratorConfig {
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        cfl: cfg.time.cfl,
        snapshot_every: cfg.time.snapshot_every,
        dt_min: cfg.time.dt * 1e-6,
        ..Default::default()
    };
    let mut report = Report::default();

    let (mut times, mut energy, mut rate) = (Vec::new(), Vec::new(), Vec::new());
    let linear = integrate(&s0, &coeffs, &IntegratorConfig { linear_only: true, ..base }, None, &mut |s| {
        times.push(s.time);
        energy.push(linear_energy(s, coeffs.gamma));
        rate.push(dissipation_rate(s, &coeffs));
    })?;
    if let Some(e) = &linear.failure {
        anyhow::bail!("linear run stopped early: {e}");
    }
    let e0 = energy[0];
    let dissipated = trapezoid(&times, &rate);
    let balance = energy.last().copied().unwrap_or(e0) - e0 + dissipated;
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    report.checks.push(
        Check::new("linear_energy_identity", balance.abs() / scale, Comparison::AtMost, IDENTITY_TOL).with_detail(
            format!(
                "|E(T) − E(0) + ∫2(μ‖∇u‖² + (μ+λ)‖div u‖²)dt| / E(0) with E = ‖u‖² + ‖z‖²/γ, E(0) = {}",
                num(e0)
            ),
        ),
    );
    let growth = energy.windows(2).map(|w| (w[1] - w[0]) / scale).fold(0.0, f64::max);
    report.checks.push(
        Check::new("linear_energy_nonincreasing", growth, Comparison::AtMost, MONOTONE_SLACK)
            .with_detail("largest step-to-step growth of E relative to E(0)"),
    );

    let full = integrate(&s0, &coeffs, &base, None, &mut |_| {})?;
    report.checks.push(
        Check::flag("nonlinear_run_completed", full.completed(), full.last().time)
            .with_detail(full.failure.as_ref().map(|e| format!("aborted: {e}")).unwrap_or_default()),
    );
    let bank = FilterBank::covering(&grid, 4);
    let mut history: Vec<Functionals> = Vec::with_capacity(full.times.len());
    for n in 1..=full.times.len() {
        history.push(energy_functionals(&bank, &full.times[..n], &full.states[..n])?);
    }
    let last = history.last().copied().unwrap_or_default();
    report.checks.push(
        Check::new("x_below_e", last.x - last.e, Comparison::AtMost, 0.0)
            .with_detail(format!("𝒳(T) = {}, ℰ(T) = {}", num(last.x), num(last.e))),
    );
    let e_growth_min = history.windows(2).map(|w| w[1].e - w[0].e).fold(0.0, f64::min);
    report.checks.push(
        Check::new("e_nondecreasing_in_t", -e_growth_min, Comparison::AtMost, MONOTONE_SLACK * last.e.max(1.0))
            .with_detail("ℰ(t) is built from sup and integral norms over [0, t]"),
    );
    let kappa = if last.x0 > 0.0 { last.e / last.x0 } else { 0.0 };
    report.checks.push(
        Check::flag("energy_ratio", kappa.is_finite(), kappa)
            .with_detail(format!("ℰ(T)/𝒳₀ with 𝒳₀ = {}", num(last.x0))),
    );

    let mut table = Table::new("energy", &["t", "linear_energy", "dissipation_rate"]);
    for ((t, e), r) in times.iter().zip(&energy).zip(&rate) {
        table.push_nums(&[*t, *e, *r]);
    }
    let mut funcs = Table::new("functionals", &["t", "x0", "x", "d", "e"]);
    for (t, f) in full.times.iter().zip(&history) {
        funcs.push_nums(&[*t, f.x0, f.x, f.d, f.e]);
    }
    report.tables.extend([table, funcs]);
    Ok(report)
}
