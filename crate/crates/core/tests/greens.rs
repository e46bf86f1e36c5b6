#![allow(clippy::needless_range_loop)]

use nst_lab_core::fit::fit_power_law;
use nst_lab_core::greens::{
    certify_beta, decay_norm_curve, eigenvalues, evolve_mode, frak_b_profile, green_matrix,
    lower_bound_ratio, mat_mul, radial_block_norms, GreenParams, ModeAmplitudes, RadialProfile, RadialQuadrature,
    PROFILE_CUTOFF,
};
use nst_lab_core::lp::{FilterBank, Integrability};
use nst_lab_core::oracle::{exp_columns, Matrix};
use nst_lab_core::{Complex64, Error, Grid, SpectralField};
use proptest::prelude::*;

fn reference() -> GreenParams {
    GreenParams::new(1.0, 0.0, 1.0).unwrap()
}

fn oracle(t: f64, k: f64, p: &GreenParams) -> Matrix {
    let a = p.symbol(k);
    exp_columns(&Matrix::from_real(2, &[a[0][0], a[0][1], a[1][0], a[1][1]]), t, 1e-12).unwrap()
}

#[test]
fn closed_form_matches_oracle_on_a_grid() {
    for p in [reference(), GreenParams::new(0.4, 0.3, 1.4).unwrap()] {
        let kt = p.threshold();
        let mut worst: f64 = 0.0;
        for i in 0..30 {
            // radii straddle the double root on both branches
            let k = 0.05 * kt + 2.5 * kt * i as f64 / 29.0;
            for j in 0..30 {
                let t = 0.01 + 10.0 * j as f64 / 29.0;
                let g = green_matrix(t, k, &p);
                let o = oracle(t, k, &p);
                for r in 0..2 {
                    for c in 0..2 {
                        worst = worst.max((Complex64::new(g[r][c], 0.0) - o.get(r, c)).norm());
                    }
                }
            }
        }
        assert!(worst < 1e-9, "{worst:e}");
    }
}

#[test]
fn double_root_is_continuous() {
    let p = GreenParams::new(0.5, 0.2, 1.3).unwrap();
    let kt = p.threshold();
    for t in [0.1, 1.0, 7.0] {
        let below = green_matrix(t, kt * (1.0 - 1e-9), &p);
        let at = green_matrix(t, kt, &p);
        let above = green_matrix(t, kt * (1.0 + 1e-9), &p);
        for r in 0..2 {
            for c in 0..2 {
                assert!((below[r][c] - at[r][c]).abs() < 1e-7);
                assert!((above[r][c] - at[r][c]).abs() < 1e-7);
            }
        }
    }
    let (l1, l2) = eigenvalues(kt, &p);
    assert!((l1 - l2).norm() < 1e-6);
}

#[test]
fn semigroup_law() {
    let p = GreenParams::new(0.3, 0.1, 1.4).unwrap();
    for k in [0.1, 1.0, p.threshold(), 5.0, 40.0] {
        for (t, s) in [(0.2, 0.7), (1.5, 3.0), (10.0, 0.01)] {
            let prod = mat_mul(&green_matrix(t, k, &p), &green_matrix(s, k, &p));
            let whole = green_matrix(t + s, k, &p);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((prod[r][c] - whole[r][c]).abs() < 1e-10, "k={k} t={t} s={s}");
                }
            }
        }
    }
}

#[test]
fn lower_bound_certificate() {
    let p = reference();
    let times: Vec<f64> = (0..=200).map(|i| 0.05 * i as f64).collect();
    let cert = certify_beta(&p, &times, 200, 0.25).unwrap();
    assert!(cert.beta > 0.0 && cert.beta <= p.threshold());
    assert!(cert.infimum >= 0.25);
    assert!(cert.sharpest_exponent <= p.q() * (1.0 + 1e-9));
    // the certificate holds for arbitrary data, checked against the oracle
    for i in 1..=20 {
        let k = cert.beta * i as f64 / 20.0;
        for &t in &[0.3, 2.0, 9.0] {
            let o = oracle(t, k, &p);
            for (m0, z0) in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8), (0.3, 0.9)] {
                let v = o.apply(&[Complex64::new(m0, 0.0), Complex64::new(z0, 0.0)]);
                let out = v[0].norm_sqr() + v[1].norm_sqr();
                let floor = 0.25 * (-2.0 * p.q() * k * k * t).exp() * (m0 * m0 + z0 * z0);
                assert!(out >= floor * (1.0 - 1e-9));
                let r = lower_bound_ratio(t, k, cert.beta, &p, m0, z0).unwrap();
                assert!(r >= 0.25 * (1.0 - 1e-9));
            }
        }
    }
    assert!(matches!(
        lower_bound_ratio(1.0, 2.0 * cert.beta, cert.beta, &p, 1.0, 0.0),
        Err(Error::OutOfValidity { .. })
    ));
}

#[test]
fn transverse_part_is_pure_heat() {
    let p = GreenParams::new(0.7, 0.2, 1.4).unwrap();
    for k in [0.01, 0.5, 3.0] {
        for t in [0.1, 1.0, 10.0] {
            let out = evolve_mode(t, k, &p, ModeAmplitudes { m: 0.0, n: 1.3, z: 0.0 });
            assert_eq!(out.m, 0.0);
            assert_eq!(out.z, 0.0);
            assert!((out.n - 1.3 * (-0.7 * k * k * t).exp()).abs() < 1e-15);
        }
    }
}

#[test]
fn radial_shells_match_a_lattice() {
    // whole-space data sampled on a large torus: coefficient f̂(ξ)/L^d
    let n = 512;
    let length = 2.0 * std::f64::consts::PI * 128.0;
    let g = Grid::new(2, n, length).unwrap();
    let profile = RadialProfile {
        dim: 2,
        exponent: -0.5,
        cutoff: Some(PROFILE_CUTOFF),
        weights: ModeAmplitudes { m: 1.0, n: 0.0, z: 0.0 },
    };
    let vol = g.volume();
    let coeffs = (0..g.total())
        .map(|idx| Complex64::new(profile.amplitude(g.xi_norm(idx)).m / vol, 0.0))
        .collect();
    let f = SpectralField::from_coeffs(&g, 1, coeffs).unwrap();
    let bank = FilterBank::new(-6, 2, 4).unwrap();
    let lattice = bank.block_norms(&f, Integrability::Two);
    let quad = RadialQuadrature { k_min: -4, k_max: -1, ..Default::default() };
    let radial = radial_block_norms(2, &quad, |r| profile.amplitude(r).m.powi(2));
    // amplitude |ξ|^{−1/2} in two dimensions has flat dyadic mass at σ₀ = −1/2
    let flat0 = 2f64.powf(-0.5 * radial[0].0 as f64) * radial[0].1;
    for &(k, value) in &radial {
        let lat = lattice[(k - bank.k_min()) as usize];
        assert!((lat / value - 1.0).abs() < 0.02, "k={k}: {lat} vs {value}");
        let flat = 2f64.powf(-0.5 * k as f64) * value;
        assert!((flat / flat0 - 1.0).abs() < 1e-6, "k={k}");
    }
}

#[test]
fn linear_decay_rates() {
    let p = reference();
    let sigma0 = -1.5;
    let profile = frak_b_profile(sigma0, 3).unwrap();
    let times: Vec<f64> = (0..16).map(|i| 10f64.powf(1.0 + 2.0 * i as f64 / 15.0)).collect();
    let quad = RadialQuadrature::default();
    for sigma in [-1.0, 0.0] {
        let curve = decay_norm_curve(&profile, &p, sigma, &times, &quad).unwrap();
        let fit = fit_power_law(&times, &curve).unwrap();
        let expect = -(sigma - sigma0) / 2.0;
        assert!((fit.slope / expect - 1.0).abs() < 0.02, "σ={sigma}: {}", fit.slope);
        assert!(curve.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn profile_preconditions() {
    assert!(frak_b_profile(-1.5, 3).is_ok());
    assert!(frak_b_profile(-0.6, 3).is_ok());
    assert!(frak_b_profile(-1.6, 3).is_err());
    assert!(frak_b_profile(-0.5, 3).is_err());
    // the window [−d/2, d/2−2) is empty in two dimensions
    assert!(frak_b_profile(-1.0, 2).is_err());
    assert!(frak_b_profile(-1.5, 3).unwrap().amplitude(0.0).norm_sq() == 0.0);
    assert!(frak_b_profile(0.0, 4).is_err());
    assert!(GreenParams::new(0.0, 0.0, 1.0).is_err());
    assert!(GreenParams::new(1.0, -2.5, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_matrix_agrees_with_oracle(
        mu in 0.05f64..2.0, lam in -0.05f64..1.0, gamma in 0.5f64..3.0,
        k in 0.001f64..20.0, t in 0.0f64..5.0,
    ) {
        let p = GreenParams::new(mu, lam, gamma).unwrap();
        let g = green_matrix(t, k, &p);
        let o = oracle(t, k, &p);
        for r in 0..2 {
            for c in 0..2 {
                prop_assert!((g[r][c] - o.get(r, c).re).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn determinant_is_exponential_of_trace(k in 0.001f64..20.0, t in 0.0f64..5.0) {
        let p = GreenParams::new(0.6, 0.1, 1.4).unwrap();
        let g = green_matrix(t, k, &p);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let expect = (-p.nu() * k * k * t).exp();
        prop_assert!((det - expect).abs() < 1e-12 + 1e-9 * expect);
    }
}
