#![allow(dead_code)]

use nst_lab_core::nst::NstState;
use nst_lab_core::{Complex64, Grid, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TAU: f64 = std::f64::consts::TAU;

/// Real random field with modes `0 < |j| ≤ kmax` (integer units) and
/// amplitudes decaying like `1/(1+|j|²)`.
pub fn random_field(grid: &Grid, ncomp: usize, kmax: f64, amp: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid, ncomp);
    for c in 0..ncomp {
        for idx in 0..grid.total() {
            let m = grid.modes(idx);
            let j2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
            if j2 > 0.0 && j2 <= kmax * kmax {
                let mag = amp * rng.gen_range(0.5..1.0) / (1.0 + j2);
                let phase = rng.gen_range(0.0..TAU);
                f.component_coeffs_mut(c)[idx] = Complex64::from_polar(mag, phase);
            }
        }
    }
    f.enforce_hermitian();
    f
}

pub fn random_state(grid: &Grid, kmax: f64, amp: f64, seed: u64) -> NstState {
    NstState::new(
        random_field(grid, 1, kmax, amp, seed),
        random_field(grid, grid.dim(), kmax, amp, seed + 1),
        random_field(grid, 1, kmax, amp, seed + 2),
        0.0,
    )
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
