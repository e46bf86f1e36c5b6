use nst_lab_core::greens::{
    certify_beta, eigenvalues, evolve_mode, green_matrix, mat_mul, worst_lower_bound_ratio,
    ModeAmplitudes,
};
use nst_lab_core::integrator::ModePropagator;
use nst_lab_core::nst::{Coefficients, NstState};
use nst_lab_core::oracle::{exp_columns, Matrix};
use nst_lab_core::{Complex64, Grid, SpectralField};

use super::{linspace, logspace, Report};
use crate::config::ExperimentConfig;
use crate::manifest::{Check, Comparison};
use crate::output::{num, Table};

pub const ORACLE_TOL: f64 = 1e-9;
pub const SEMIGROUP_TOL: f64 = 1e-10;
pub const BOUND: f64 = 0.25;

/// Grid that always contains the double root and `t ∈ {t_min, 1, t_max}`.
pub fn sweep_grid(cfg: &ExperimentConfig, kt: f64) -> (Vec<f64>, Vec<f64>) {
    let g = &cfg.greens;
    let mut times = logspace(g.t_min, g.t_max, g.nt);
    if g.t_min < 1.0 && g.t_max > 1.0 {
        let i = nearest(&times, 1.0);
        times[i] = 1.0;
    }
    let mut radii = linspace(0.1 * kt, 3.0 * kt, g.nk);
    let i = nearest(&radii, kt);
    radii[i] = kt;
    (times, radii)
}

fn nearest(v: &[f64], x: f64) -> usize {
    (0..v.len()).min_by(|&a, &b| (v[a] - x).abs().total_cmp(&(v[b] - x).abs())).unwrap_or(0)
}

fn max_entry_diff(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    (0..4).map(|i| (a[i / 2][i % 2] - b[i / 2][i % 2]).abs()).fold(0.0, f64::max)
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let p = cfg.green_params()?;
    let kt = p.threshold();
    let (times, radii) = sweep_grid(cfg, kt);
    let mut report = Report::default();

    let mut table =
        Table::new("greens", &["t", "xi", "g11", "g12", "g21", "g22", "oracle_residual", "ratio"]);
    let mut worst_oracle = (0.0f64, 0.0, 0.0);
    let mut worst_eig: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for &k in &radii {
        let (l1, l2) = eigenvalues(k, &p);
        let trace = -p.nu() * k * k;
        let det = p.gamma * k * k;
        worst_eig = worst_eig
            .max(((l1 + l2).re - trace).abs() / trace.abs())
            .max(((l1 * l2).re - det).abs() / det)
            .max((l1 + l2).im.abs() / trace.abs());
        let g0 = green_matrix(0.0, k, &p);
        worst_identity = worst_identity.max(max_entry_diff(&g0, &[[1.0, 0.0], [0.0, 1.0]]));
        let a = p.symbol(k);
        let sym = Matrix::from_real(2, &[a[0][0], a[0][1], a[1][0], a[1][1]]);
        for &t in &times {
            let g = green_matrix(t, k, &p);
            let o = exp_columns(&sym, t, 1e-12)?;
            let oracle = [[o.get(0, 0).re, o.get(0, 1).re], [o.get(1, 0).re, o.get(1, 1).re]];
            let res = max_entry_diff(&g, &oracle);
            if res > worst_oracle.0 {
                worst_oracle = (res, t, k);
            }
            let ratio = worst_lower_bound_ratio(t, k, &p);
            table.push_nums(&[t, k, g[0][0], g[0][1], g[1][0], g[1][1], res, ratio]);
        }
    }
    report.checks.push(
        Check::new("eigenvalue_identities", worst_eig, Comparison::Below, 1e-12)
            .with_detail("relative error of λ₊+λ₋ = −(2μ+λ)|ξ|² and λ₊λ₋ = γ|ξ|²"),
    );
    report.checks.push(
        Check::new("identity_at_t0", worst_identity, Comparison::AtMost, 0.0)
            .with_detail("G(0, ξ) = I entrywise"),
    );
    report.checks.push(
        Check::new("oracle_residual", worst_oracle.0, Comparison::Below, ORACLE_TOL).with_detail(format!(
            "max |closed form − RK4 oracle| over {}×{} grid; worst at t={}, |ξ|={}",
            times.len(),
            radii.len(),
            num(worst_oracle.1),
            num(worst_oracle.2)
        )),
    );

    let mut worst_sg = (0.0f64, 0.0, 0.0, 0.0);
    for &k in &radii {
        for &t in &times {
            let gt = green_matrix(t, k, &p);
            for &s in &times {
                let res = max_entry_diff(&mat_mul(&gt, &green_matrix(s, k, &p)), &green_matrix(t + s, k, &p));
                if res > worst_sg.0 {
                    worst_sg = (res, t, s, k);
                }
            }
        }
    }
    report.checks.push(
        Check::new("semigroup_law", worst_sg.0, Comparison::Below, SEMIGROUP_TOL).with_detail(format!(
            "max |G(t+s) − G(t)G(s)|; worst at t={}, s={}, |ξ|={}",
            num(worst_sg.1),
            num(worst_sg.2),
            num(worst_sg.3)
        )),
    );

    let g = &cfg.greens;
    let bound_times = linspace(0.0, g.bound_t_max, g.bound_nt);
    let cert = certify_beta(&p, &bound_times, g.bound_nk, BOUND)?;
    report.checks.push(
        Check::new("lower_bound_infimum", cert.infimum, Comparison::AtLeast, BOUND).with_detail(format!(
            "inf of |G(t)U₀|²/(e^{{−2q|ξ|²t}}|U₀|²) over worst-case data, t ∈ [0, {}], |ξ| ∈ (0, β], β_certified = {}",
            num(g.bound_t_max),
            num(cert.beta)
        )),
    );
    report.checks.push(
        Check::new("beta_certified", cert.beta, Comparison::AtLeast, f64::MIN_POSITIVE)
            .with_detail(format!("double-root radius {}", num(kt))),
    );
    report.checks.push(Check::flag("sharpest_exponent", true, cert.sharpest_exponent).with_detail(format!(
        "smallest c with |GU₀|² ≥ ¼e^{{−2c|ξ|²t}}|U₀|² below β; q = {}",
        num(p.q())
    )));
    if !cert.time_free_form_holds {
        report.warnings.push(format!(
            "the time-free form ¼e^{{−q|ξ|²}} fails below β = {}; the t-dependent form is certified",
            num(cert.beta)
        ));
    }

    report.checks.push(heat_check(&p, &radii, &times));

    let mut bound = Table::new("lower_bound", &["xi", "min_ratio"]);
    for i in 1..=g.bound_nk {
        let k = cert.beta * i as f64 / g.bound_nk as f64;
        let m = bound_times.iter().map(|&t| worst_lower_bound_ratio(t, k, &p)).fold(f64::INFINITY, f64::min);
        bound.push_nums(&[k, m]);
    }
    report.tables.push(table);
    report.tables.push(bound);
    Ok(report)
}

/// Solenoidal data under the exact linear propagator decay by the heat factor
/// alone, both radially and on a grid.
fn heat_check(p: &nst_lab_core::greens::GreenParams, radii: &[f64], times: &[f64]) -> Check {
    let mut worst: f64 = 0.0;
    for &k in radii {
        for &t in times {
            let out = evolve_mode(t, k, p, ModeAmplitudes { m: 0.0, n: 1.0, z: 0.0 });
            worst = worst.max((out.n - (-p.mu * k * k * t).exp()).abs()).max(out.m.abs()).max(out.z.abs());
        }
    }
    let grid = Grid::new(2, 16, std::f64::consts::TAU).expect("valid grid");
    let u = SpectralField::from_fn(&grid, 2, |x, out| {
        out[0] = (x[1]).sin() + 0.5 * (2.0 * x[0] + x[1]).cos();
        out[1] = (x[0]).cos() - (2.0 * x[0] + x[1]).cos();
    });
    let s = NstState::new(SpectralField::zeros(&grid, 1), u.clone(), SpectralField::zeros(&grid, 1), 0.0)
        .expect("valid state");
    let c = Coefficients { mu: p.mu, lambda: p.lambda, gamma: p.gamma, mach: 1.0, vacuum_floor: 1e-3 };
    for &t in times {
        let out = ModePropagator::new(&grid, &c, t).apply(&s);
        let exact = u.map_modes(|idx| Complex64::new((-p.mu * grid.xi_sq(idx) * t).exp(), 0.0));
        let err = out.u.sub(&exact).map(|d| d.max_coeff()).unwrap_or(f64::INFINITY);
        worst = worst.max(err).max(out.a.max_coeff()).max(out.z.max_coeff());
    }
    Check::new("heat_part_exact", worst, Comparison::Below, 1e-14)
        .with_detail("transverse data decays by e^{−μ|ξ|²t} and leaves (a, z) at zero")
}
