mod common;

use common::{max_abs_diff, random_field, TAU};
use nst_lab_core::{DerivativeKind, Error, Grid, SpectralField};
use proptest::prelude::*;

fn grids() -> Vec<Grid> {
    vec![Grid::new(2, 32, TAU).unwrap(), Grid::new(3, 16, 3.0).unwrap()]
}

#[test]
fn divergence_of_gradient_is_laplacian() {
    for g in grids() {
        let f = random_field(&g, 1, 5.0, 1.0, 7);
        let lhs = f
            .derivative(DerivativeKind::Gradient)
            .unwrap()
            .derivative(DerivativeKind::Divergence)
            .unwrap();
        let rhs = f.derivative(DerivativeKind::Laplacian).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_coeff() < 1e-12 * rhs.max_coeff());
    }
}

#[test]
fn lambda_squared_is_minus_laplacian() {
    for g in grids() {
        let f = random_field(&g, 1, 6.0, 1.0, 11);
        let l2 = f.derivative(DerivativeKind::LambdaPower(2.0)).unwrap();
        let lap = f.derivative(DerivativeKind::Laplacian).unwrap();
        assert!(l2.add(&lap).unwrap().max_coeff() < 1e-12 * lap.max_coeff());
    }
}

#[test]
fn lambda_power_zero_mode() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let f = SpectralField::constant(&g, 2.5);
    let id = f.derivative(DerivativeKind::LambdaPower(0.0)).unwrap();
    assert_eq!(id.mean(0), 2.5);
    assert_eq!(f.derivative(DerivativeKind::LambdaPower(1.0)).unwrap().mean(0), 0.0);
    assert!(matches!(
        f.derivative(DerivativeKind::LambdaPower(-0.5)),
        Err(Error::SingularMode(_))
    ));
}

#[test]
fn curl_layouts() {
    let g2 = Grid::new(2, 16, TAU).unwrap();
    let u = SpectralField::from_fn(&g2, 2, |x, out| {
        out[0] = -x[1].sin();
        out[1] = x[0].sin();
    });
    // curl_21 = ∂_1 u² − ∂_2 u¹ = cos x + cos y
    let c = u.derivative(DerivativeKind::Curl).unwrap();
    assert_eq!(c.ncomp(), 1);
    let expect = SpectralField::scalar_from_fn(&g2, |x| x[0].cos() + x[1].cos());
    assert!(c.sub(&expect).unwrap().max_coeff() < 1e-13);

    let g3 = Grid::new(3, 8, TAU).unwrap();
    let u = random_field(&g3, 3, 3.0, 1.0, 5);
    let c = u.derivative(DerivativeKind::Curl).unwrap();
    assert_eq!(c.ncomp(), 9);
    for i in 0..3 {
        assert!(c.component(i * 3 + i).max_coeff() < 1e-15);
        for j in 0..3 {
            let sym = c.component(i * 3 + j).add(&c.component(j * 3 + i)).unwrap();
            assert!(sym.max_coeff() < 1e-15);
        }
    }
}

#[test]
fn leray_split_properties() {
    for g in grids() {
        let mut u = random_field(&g, g.dim(), 6.0, 1.0, 3);
        u.coeffs_mut()[0] = 0.4.into();
        let (p, q) = u.leray_project().unwrap();
        assert!(p.add(&q).unwrap().sub(&u).unwrap().max_coeff() < 1e-12);
        let div_p = p.derivative(DerivativeKind::Divergence).unwrap();
        assert!(div_p.max_coeff() < 1e-12);
        let curl_q = q.derivative(DerivativeKind::Curl).unwrap();
        assert!(curl_q.max_coeff() < 1e-12);
        // zero mode goes to ℙu
        assert_eq!(p.mean(0), 0.4);
        assert_eq!(q.mean(0), 0.0);
    }
}

#[test]
fn hodge_round_trip_and_norms() {
    for g in grids() {
        let u = random_field(&g, g.dim(), 6.0, 1.0, 21);
        let h = u.hodge_decompose(false).unwrap();
        let back = h.reconstruct().unwrap();
        assert!(back.sub(&u).unwrap().max_coeff() < 1e-12 * u.max_coeff());
        let split = h.m.l2_norm_sq() + h.curl_norm_factor() * h.n.l2_norm_sq();
        assert!((split - u.l2_norm_sq()).abs() < 1e-12 * u.l2_norm_sq());
    }
}

#[test]
fn hodge_divergence_matches_lambda_m() {
    let g = Grid::new(2, 32, TAU).unwrap();
    let u = random_field(&g, 2, 6.0, 1.0, 8);
    let h = u.hodge_decompose(false).unwrap();
    let lm = h.m.derivative(DerivativeKind::LambdaPower(1.0)).unwrap();
    let div = u.derivative(DerivativeKind::Divergence).unwrap();
    assert!(lm.sub(&div).unwrap().max_coeff() < 1e-12);
}

#[test]
fn round_trip_and_parseval() {
    for g in grids() {
        let f = random_field(&g, 2, 100.0, 1.0, 4);
        let phys = f.to_physical();
        let back = SpectralField::from_physical(&g, 2, &phys).unwrap();
        let scale = phys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_abs_diff(&back.to_physical(), &phys) < 1e-12 * scale);
        let rel = (f.l2_norm_sq() - f.l2_norm_sq_physical()).abs() / f.l2_norm_sq();
        assert!(rel < 1e-12);
    }
}

#[test]
fn dealias_keeps_two_thirds() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let mut f = random_field(&g, 1, 100.0, 1.0, 2);
    f.dealias();
    for idx in 0..g.total() {
        let m = g.modes(idx);
        if m[0].abs() > 5 || m[1].abs() > 5 {
            assert_eq!(f.coeffs()[idx].norm(), 0.0);
        }
    }
}

fn arb_field() -> impl Strategy<Value = (u64, f64)> {
    (any::<u64>(), 1.0f64..12.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn physical_values_are_real((seed, kmax) in arb_field()) {
        let g = Grid::new(2, 16, TAU).unwrap();
        let f = random_field(&g, 1, kmax, 1.0, seed);
        let mut raw = f.coeffs().to_vec();
        nst_lab_core::fft::transform_nd(&nst_lab_core::fft::Radix2::new(16), 2, &mut raw, true);
        let imag = raw.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        prop_assert!(imag < 1e-13);
    }

    #[test]
    fn leray_is_idempotent((seed, kmax) in arb_field()) {
        let g = Grid::new(2, 16, TAU).unwrap();
        let u = random_field(&g, 2, kmax, 1.0, seed);
        let p = u.leray().unwrap();
        let pp = p.leray().unwrap();
        prop_assert!(pp.sub(&p).unwrap().max_coeff() < 1e-14);
        let q = u.sub(&p).unwrap();
        prop_assert!(p.inner(&q).unwrap().abs() < 1e-12 * (1.0 + u.l2_norm_sq()));
    }

    #[test]
    fn derivatives_commute((seed, kmax) in arb_field()) {
        let g = Grid::new(2, 16, TAU).unwrap();
        let f = random_field(&g, 1, kmax, 1.0, seed);
        let xy = f.partial(0).partial(1);
        let yx = f.partial(1).partial(0);
        prop_assert!(xy.sub(&yx).unwrap().max_coeff() < 1e-13);
    }
}
