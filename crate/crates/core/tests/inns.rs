mod common;

use common::{random_field, TAU};
use nst_lab_core::fit::fit_loglog;
use nst_lab_core::inns::{integrate_inns, rhs_inns, InnsSeries, InnsState};
use nst_lab_core::integrator::IntegratorConfig;
use nst_lab_core::{Grid, SpectralField};

fn config(dt: f64, t_end: f64) -> IntegratorConfig {
    IntegratorConfig { dt, t_end, snapshot_every: 1, ..Default::default() }
}

fn taylor_green(g: &Grid, t: f64, mu_bar: f64) -> SpectralField {
    let decay = (-2.0 * mu_bar * t).exp();
    SpectralField::from_fn(g, 2, |x, out| {
        out[0] = decay * x[0].sin() * x[1].cos();
        out[1] = -decay * x[0].cos() * x[1].sin();
    })
}

fn run(s: &InnsState, mu_bar: f64, cfg: &IntegratorConfig) -> InnsSeries {
    let series = integrate_inns(s, mu_bar, cfg).unwrap();
    assert!(series.failure.is_none());
    series
}

#[test]
fn taylor_green_vortex() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let mu_bar = 0.1;
    let s = InnsState::new(SpectralField::constant(&g, 1.0), taylor_green(&g, 0.0, mu_bar), 0.0).unwrap();
    let series = run(&s, mu_bar, &config(0.01, 1.0));
    let exact = taylor_green(&g, 1.0, mu_bar);
    let err = series.last().v.sub(&exact).unwrap().max_coeff();
    assert!(err < 1e-8, "{err:e}");

    let times: Vec<f64> = series.times[1..].to_vec();
    let norms: Vec<f64> = series.states[1..].iter().map(|s| s.v.l2_norm()).collect();
    // ‖v(t)‖ = ‖v₀‖e^{−2μ̄t}: a straight line in log-linear coordinates
    let logs: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let n = times.len() as f64;
    let (mt, ml) = (times.iter().sum::<f64>() / n, logs.iter().sum::<f64>() / n);
    let slope = times.iter().zip(&logs).map(|(t, l)| (t - mt) * (l - ml)).sum::<f64>()
        / times.iter().map(|t| (t - mt).powi(2)).sum::<f64>();
    assert!((slope / (-2.0 * mu_bar) - 1.0).abs() < 0.01, "slope {slope}");
}

#[test]
fn mass_and_incompressibility() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let mut rho = random_field(&g, 1, 6.0, 0.2, 1);
    rho.coeffs_mut()[0] = 1.0.into();
    let s = InnsState::new(rho, random_field(&g, 2, 6.0, 0.5, 2), 0.0).unwrap();
    let series = run(&s, 0.05, &config(0.01, 2.0));
    let m0 = s.rho.mean(0);
    for st in &series.states {
        assert!((st.rho.mean(0) - m0).abs() < 1e-10);
        assert!(st.div_norm() < 1e-10);
    }
    let energy: Vec<f64> = series.states.iter().map(|s| s.kinetic_energy()).collect();
    for w in energy.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
}

#[test]
fn initial_velocity_is_projected() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let v = random_field(&g, 2, 5.0, 1.0, 3);
    let s = InnsState::new(SpectralField::constant(&g, 1.0), v.clone(), 0.0).unwrap();
    assert_eq!(s.v, v.leray().unwrap());
    assert!(s.div_norm() < 1e-13);
}

#[test]
fn zero_data_stays_zero() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let s = InnsState::new(SpectralField::zeros(&g, 1), SpectralField::zeros(&g, 2), 0.0).unwrap();
    let series = run(&s, 0.1, &config(0.1, 1.0));
    assert_eq!(series.last().rho.max_coeff(), 0.0);
    assert_eq!(series.last().v.max_coeff(), 0.0);
    let r = rhs_inns(&s, 0.1).unwrap();
    assert_eq!(r.v.max_coeff(), 0.0);
}

#[test]
fn density_advection_is_second_order() {
    // uniform flow: ϱ(t, x) = ϱ₀(x − ct)
    let g = Grid::new(2, 32, TAU).unwrap();
    let c = [0.7, -0.3];
    let profile = |x: [f64; 3]| 1.0 + 0.2 * (2.0 * x[0] + x[1]).sin();
    let v = SpectralField::from_fn(&g, 2, |_, out| {
        out[0] = c[0];
        out[1] = c[1];
    });
    let t_end = 1.0;
    let exact = SpectralField::scalar_from_fn(&g, |x| profile([x[0] - c[0] * t_end, x[1] - c[1] * t_end, 0.0]));
    let dts = [0.04, 0.02, 0.01];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let s = InnsState::new(SpectralField::scalar_from_fn(&g, profile), v.clone(), 0.0).unwrap();
            let series = run(&s, 0.1, &config(dt, t_end));
            series.last().rho.sub(&exact).unwrap().l2_norm()
        })
        .collect();
    let fit = fit_loglog(&dts, &errs).unwrap();
    assert!(fit.slope > 1.9, "errors {errs:?}");
}

#[test]
fn viscosity_must_be_positive() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let s = InnsState::new(SpectralField::zeros(&g, 1), SpectralField::zeros(&g, 2), 0.0).unwrap();
    assert!(integrate_inns(&s, 0.0, &config(0.1, 1.0)).is_err());
    assert!(InnsState::new(SpectralField::zeros(&g, 2), SpectralField::zeros(&g, 2), 0.0).is_err());
}
