mod common;

use common::{random_state, TAU};
use nst_lab_core::lp::{BesovSpec, FilterBank};
use nst_lab_core::nst::{
    energy_functionals, omega, omega_rhs, recover_physical, rhs_scaled, rhs_unscaled, tendency,
    total_mass, FluidParams, NstState, Part,
};
use nst_lab_core::{Error, Grid, SpectralField};
use proptest::prelude::*;

fn params() -> FluidParams {
    FluidParams::new(0.1, 0.05, 1.4, 1.0).unwrap()
}

fn smooth_state(g: &Grid) -> NstState {
    let a = SpectralField::scalar_from_fn(g, |x| 0.1 * x[0].sin() * x[1].cos());
    let u = SpectralField::from_fn(g, 2, |x, out| {
        out[0] = 0.1 * (x[0] + x[1]).cos();
        out[1] = 0.05 * (2.0 * x[0]).sin() + 0.02 * x[1].cos();
    });
    let z = SpectralField::scalar_from_fn(g, |x| 0.1 * x[0].cos() + 0.03 * (x[0] - 2.0 * x[1]).sin());
    NstState::new(a, u, z, 0.0).unwrap()
}

#[test]
fn unit_mach_matches_unscaled() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let s = random_state(&g, 8.0, 0.1, 1);
    let p = params();
    let r1 = rhs_unscaled(&s, &p).unwrap();
    let r2 = rhs_scaled(&s, &p.with_mach(1.0, p.mu, p.lambda).unwrap()).unwrap();
    assert_eq!(r1.distance(&r2).unwrap(), 0.0);
}

#[test]
fn still_fluid_feels_only_pressure() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let a = SpectralField::scalar_from_fn(&g, |x| 0.1 * x[0].sin());
    let z = SpectralField::scalar_from_fn(&g, |x| 0.1 * x[1].cos());
    let s = NstState::new(a.clone(), SpectralField::zeros(&g, 2), z.clone(), 0.0).unwrap();
    let r = rhs_unscaled(&s, &params()).unwrap();
    assert!(r.a.max_coeff() < 1e-15 && r.z.max_coeff() < 1e-15);
    let phys = r.u.to_physical();
    let total = g.total();
    for i in 0..total {
        let x = g.point(i);
        let expect = 0.1 * x[1].sin() / (1.0 + 0.1 * x[0].sin());
        assert!(phys[i].abs() < 1e-14);
        assert!((phys[total + i] - expect).abs() < 1e-10, "{}", phys[total + i] - expect);
    }
}

/// Second-order centred differences of the unscaled tendency.
fn fd_tendency(g: &Grid, s: &NstState, p: &FluidParams) -> Vec<f64> {
    let n = g.points_per_axis();
    let total = g.total();
    let h = g.spacing();
    let stride = [n, 1];
    let shift = |i: usize, axis: usize, off: isize| {
        let coord = (i / stride[axis]) % n;
        let moved = (coord as isize + off).rem_euclid(n as isize) as usize;
        i - coord * stride[axis] + moved * stride[axis]
    };
    let d1 = |f: &[f64], axis: usize| -> Vec<f64> {
        (0..total).map(|i| (f[shift(i, axis, 1)] - f[shift(i, axis, -1)]) / (2.0 * h)).collect()
    };
    let lap = |f: &[f64]| -> Vec<f64> {
        (0..total)
            .map(|i| {
                (0..2)
                    .map(|ax| f[shift(i, ax, 1)] - 2.0 * f[i] + f[shift(i, ax, -1)])
                    .sum::<f64>()
                    / (h * h)
            })
            .collect()
    };
    let a = s.a.to_physical();
    let z = s.z.to_physical();
    let uu = s.u.to_physical();
    let u = [&uu[..total], &uu[total..]];
    let du: Vec<Vec<Vec<f64>>> = u.iter().map(|c| (0..2).map(|ax| d1(c, ax)).collect()).collect();
    let div: Vec<f64> = (0..total).map(|i| du[0][0][i] + du[1][1][i]).collect();
    let grad_div = [d1(&div, 0), d1(&div, 1)];
    let gz = [d1(&z, 0), d1(&z, 1)];
    let flux: Vec<Vec<f64>> = u.iter().map(|c| (0..total).map(|i| a[i] * c[i]).collect()).collect();
    let div_flux: Vec<f64> = {
        let (f0, f1) = (d1(&flux[0], 0), d1(&flux[1], 1));
        (0..total).map(|i| f0[i] + f1[i]).collect()
    };
    let mut out = vec![0.0; 4 * total];
    for i in 0..total {
        out[i] = -div[i] - div_flux[i];
        out[3 * total + i] =
            -p.gamma * div[i] - (u[0][i] * gz[0][i] + u[1][i] * gz[1][i]) - p.gamma * z[i] * div[i];
    }
    for c in 0..2 {
        let lu = lap(u[c]);
        for i in 0..total {
            let visc = p.mu * lu[i] + (p.mu + p.lambda) * grad_div[c][i];
            let adv = u[0][i] * du[c][0][i] + u[1][i] * du[c][1][i];
            let f = -a[i] / (1.0 + a[i]);
            out[(1 + c) * total + i] = visc - gz[c][i] - adv + f * (visc - gz[c][i]);
        }
    }
    out
}

fn spectral_physical(r: &NstState) -> Vec<f64> {
    let mut v = r.a.to_physical();
    v.extend(r.u.to_physical());
    v.extend(r.z.to_physical());
    v
}

#[test]
fn finite_difference_oracle_converges_at_second_order() {
    let p = params();
    let errs: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| {
            let g = Grid::new(2, n, TAU).unwrap();
            let s = smooth_state(&g);
            let spec = spectral_physical(&rhs_unscaled(&s, &p).unwrap());
            let fd = fd_tendency(&g, &s, &p);
            common::max_abs_diff(&spec, &fd)
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!((3.6..4.4).contains(&ratio), "errors {errs:?}, ratio {ratio}");
}

#[test]
fn omega_route_agrees_with_components() {
    let p = params();
    for eps in [1.0, 0.25] {
        let g = Grid::new(2, 32, TAU).unwrap();
        // band-limited below N/3 so that dealiased products are exact
        let s = random_state(&g, 10.0, 0.1, 7);
        let q = p.with_mach(eps, 0.1, 0.0).unwrap();
        let r = rhs_scaled(&s, &q).unwrap();
        let direct = r.a.scaled(p.gamma).sub(&r.z).unwrap();
        let route = omega_rhs(&s, p.gamma).unwrap();
        let diff = direct.sub(&route).unwrap().max_coeff();
        assert!(diff < 1e-10 * route.max_coeff().max(1e-300), "ε={eps}: {diff:e}");
        assert_eq!(omega(&s, p.gamma).unwrap(), s.a.scaled(p.gamma).sub(&s.z).unwrap());
    }
}

#[test]
fn mach_scaling_is_consistent() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let s = random_state(&g, 8.0, 0.1, 13);
    let (mu_bar, lambda_bar) = (0.1, 0.02);
    let p = FluidParams::new(mu_bar, lambda_bar, 1.4, 1.0).unwrap();
    let base = rhs_unscaled(&s, &p).unwrap();
    for eps in [0.5, 0.125, 1.0 / 64.0] {
        let ge = Grid::new(2, 32, TAU * eps).unwrap();
        let lift = |f: &SpectralField| {
            SpectralField::from_coeffs(&ge, f.ncomp(), f.scaled(1.0 / eps).coeffs().to_vec()).unwrap()
        };
        let se = NstState::new(lift(&s.a), lift(&s.u), lift(&s.z), 0.0).unwrap();
        let q = p.with_mach(eps, mu_bar, lambda_bar).unwrap();
        let r = rhs_scaled(&se, &q).unwrap();
        let back = |f: &SpectralField| {
            SpectralField::from_coeffs(&g, f.ncomp(), f.scaled(eps.powi(3)).coeffs().to_vec()).unwrap()
        };
        let pulled = NstState::new(back(&r.a), back(&r.u), back(&r.z), 0.0).unwrap();
        let rel = pulled.distance(&base).unwrap() / base.l2_norm();
        assert!(rel < 1e-8, "ε={eps}: {rel:e}");
    }
}

#[test]
fn recovery_round_trip() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let s = random_state(&g, 8.0, 0.2, 3);
    for (gamma, a_const) in [(1.4, 1.0), (5.0 / 3.0, 0.7), (2.0, 3.0)] {
        let p = FluidParams::new(0.1, 0.0, gamma, a_const).unwrap();
        let phys = recover_physical(&s, &p).unwrap();
        for i in 0..g.total() {
            let back = a_const * (phys.rho[i] * phys.theta[i]).powf(gamma);
            assert!((back - phys.pressure[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn vacuum_is_reported() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let a = SpectralField::scalar_from_fn(&g, |x| -0.9995 * (1.0 + x[0].cos()) / 2.0);
    let s = NstState::new(a, common::random_field(&g, 2, 3.0, 0.1, 2), SpectralField::zeros(&g, 1), 0.0)
        .unwrap();
    match rhs_unscaled(&s, &params()) {
        Err(Error::Vacuum { value, floor, .. }) => assert!(value < floor),
        other => panic!("expected vacuum error, got {other:?}"),
    }
    assert!(tendency(&s, &params().unscaled(), Part::Linear).is_ok());
    assert!(matches!(recover_physical(&s, &params()), Err(Error::Vacuum { .. })));
}

#[test]
fn parameter_validation() {
    assert!(FluidParams::new(0.0, 0.0, 1.4, 1.0).is_err());
    assert!(FluidParams::new(0.1, -0.3, 1.4, 1.0).is_err());
    assert!(FluidParams::new(0.1, 0.0, 1.0, 1.0).is_err());
    assert!(FluidParams::new(0.1, 0.0, 1.4, 0.0).is_err());
    assert!(params().with_mach(1.5, 0.1, 0.0).is_err());
    assert!(params().with_mach(0.0, 0.1, 0.0).is_err());
    assert!(params().with_vacuum_floor(1.0).is_err());
}

#[test]
fn functionals_of_decaying_velocity() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let bank = FilterBank::covering(&g, 4);
    let u0 = common::random_field(&g, 2, 8.0, 1.0, 17);
    let times: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.005).collect();
    let series: Vec<NstState> = times
        .iter()
        .map(|t| {
            NstState::new(SpectralField::zeros(&g, 1), u0.scaled((-t).exp()), SpectralField::zeros(&g, 1), *t)
                .unwrap()
        })
        .collect();
    let f = energy_functionals(&bank, &times, &series).unwrap();
    let low = bank.besov_norm(&u0, &BesovSpec::l2_sum(0.0));
    let high = bank.besov_norm(&u0, &BesovSpec::l2_sum(2.0));
    assert!((f.d - high).abs() < 1e-5 * high, "{} vs {high}", f.d);
    assert!((f.x0 - low).abs() < 1e-12 * low);
    assert!((f.x - low - f.d).abs() < 1e-12 * f.x);
    assert!((f.e - low - f.d).abs() < 1e-12 * f.e);

    let single = energy_functionals(&bank, &times[..1], &series[..1]).unwrap();
    assert_eq!(single.d, 0.0);
    assert!((single.x - low).abs() < 1e-12 * low);
    assert!(energy_functionals(&bank, &times[..2], &series[..3]).is_err());
    assert!(energy_functionals(&bank, &[], &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn density_tendency_has_zero_mean(seed in any::<u64>(), eps in 0.05f64..1.0) {
        let g = Grid::new(2, 16, TAU).unwrap();
        let s = random_state(&g, 5.0, 0.1, seed);
        let q = params().with_mach(eps, 0.1, 0.0).unwrap();
        let r = rhs_scaled(&s, &q).unwrap();
        prop_assert!(r.a.mean(0).abs() < 1e-15);
        prop_assert_eq!(total_mass(&s), g.volume() * (1.0 + s.a.mean(0)));
    }

    #[test]
    fn linear_part_is_linear(seed in any::<u64>(), c in -2.0f64..2.0) {
        let g = Grid::new(2, 16, TAU).unwrap();
        let s = random_state(&g, 5.0, 0.1, seed);
        let cf = params().unscaled();
        let l1 = tendency(&s.scaled(c), &cf, Part::Linear).unwrap();
        let l2 = tendency(&s, &cf, Part::Linear).unwrap().scaled(c);
        prop_assert!(l1.distance(&l2).unwrap() < 1e-12 * (1.0 + l2.l2_norm()));
    }
}
