use nst_lab_core::nst::NstState;
use nst_lab_core::{Complex64, Grid, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialSpec, Profile};

/// Real field with modes `0 < |j| ≤ kmax` (integer wavenumbers), magnitude
/// `amp·U(1/2, 1)/(1+|j|²)` and a uniform random phase.
pub fn random_field(grid: &Grid, ncomp: usize, kmax: f64, amp: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut f = SpectralField::zeros(grid, ncomp);
    for c in 0..ncomp {
        for idx in 0..grid.total() {
            let m = grid.modes(idx);
            let j2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
            if j2 > 0.0 && j2 <= kmax * kmax {
                let mag = amp * rng.gen_range(0.5..1.0) / (1.0 + j2);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                f.component_coeffs_mut(c)[idx] = Complex64::from_polar(mag, phase);
            }
        }
    }
    f.enforce_hermitian();
    f
}

/// Initial `(a, u, z)` for a profile; `a`, `u`, `z` draw from one stream in that order.
pub fn initial_state(grid: &Grid, spec: &InitialSpec, seed: u64) -> NstState {
    let d = grid.dim();
    match spec.profile {
        Profile::Zero => NstState::zeros(grid),
        Profile::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_field(grid, 1, spec.kmax, spec.amplitude, &mut rng);
            let u = random_field(grid, d, spec.kmax, spec.amplitude, &mut rng);
            let z = random_field(grid, 1, spec.kmax, spec.amplitude, &mut rng);
            NstState::new(a, u, z, 0.0).expect("fields share the grid")
        }
        Profile::TaylorGreen => {
            let k = std::f64::consts::TAU / grid.length();
            let amp = spec.amplitude;
            let u = SpectralField::from_fn(grid, d, |x, out| {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[0] = amp * (k * x[0]).sin() * (k * x[1]).cos();
                out[1] = -amp * (k * x[0]).cos() * (k * x[1]).sin();
            });
            NstState::new(SpectralField::zeros(grid, 1), u, SpectralField::zeros(grid, 1), 0.0)
                .expect("fields share the grid")
        }
    }
}
