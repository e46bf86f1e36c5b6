//! Closed-form analysis of the linearized acoustic–viscous block.
//!
//! In Hodge variables `m = Λ^{-1}div u`, `n = Λ^{-1}curl u` the linearized
//! system decouples per frequency into
//!
//! ```text
//! d/dt (m̂, ẑ) = A(ξ) (m̂, ẑ),   A(ξ) = [[−(2μ+λ)|ξ|², |ξ|], [−γ|ξ|, 0]]
//! d/dt n̂      = −μ|ξ|² n̂
//! ```
//!
//! and the Green matrix `G(t, ξ) = exp(tA(ξ))` is evaluated in closed form on
//! both the oscillatory and the overdamped branch.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lp::{chi, phi, pow2};

/// Below this `|rt|` the ratio `sin(rt)/r` uses its Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Real 2×2 matrix, `m[row][col]`.
pub type Mat2 = [[f64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Linear-flow coefficients `μ`, `λ`, `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenParams {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl GreenParams {
    pub fn new(mu: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Config(format!("μ must be positive, got {mu}")));
        }
        if !(2.0 * mu + lambda > 0.0) {
            return Err(Error::Config(format!("2μ+λ must be positive, got {}", 2.0 * mu + lambda)));
        }
        // the linear block only needs γ > 0; γ = 1 is the reference setting
        if !(gamma > 0.0) {
            return Err(Error::Config(format!("γ must be positive, got {gamma}")));
        }
        Ok(Self { mu, lambda, gamma })
    }

    /// `q = μ + λ/2`.
    pub fn q(&self) -> f64 {
        self.mu + 0.5 * self.lambda
    }

    /// `ν = 2μ + λ`.
    pub fn nu(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// Double-root radius `2√γ/(2μ+λ)`, which bounds the oscillatory branch.
    pub fn threshold(&self) -> f64 {
        2.0 * libm::sqrt(self.gamma) / self.nu()
    }

    /// Symbol `A(ξ)` at radius `k`.
    pub fn symbol(&self, k: f64) -> Mat2 {
        [[-self.nu() * k * k, k], [-self.gamma * k, 0.0]]
    }
}

/// Eigenvalues `(λ₊, λ₋)` of `A(ξ)` at radius `k`, with `Re λ₊ ≥ Re λ₋`.
pub fn eigenvalues(k: f64, p: &GreenParams) -> (Complex64, Complex64) {
    block_eigenvalues(p.nu() * k * k, k, p.gamma)
}

/// Eigenvalues of `[[−α, β], [−γβ, 0]]`.
pub fn block_eigenvalues(alpha: f64, beta: f64, gamma: f64) -> (Complex64, Complex64) {
    let h = 0.5 * alpha;
    let det = gamma * beta * beta;
    let disc = det - h * h;
    if disc >= 0.0 {
        let r = libm::sqrt(disc);
        (Complex64::new(-h, r), Complex64::new(-h, -r))
    } else {
        let rho = libm::sqrt(-disc);
        let fast = -h - rho;
        // product of the roots is det; avoids cancellation in −h + ρ
        let slow = if fast != 0.0 { det / fast } else { 0.0 };
        (Complex64::new(slow, 0.0), Complex64::new(fast, 0.0))
    }
}

/// `exp(tB)` for `B = [[−α, β], [−γβ, 0]]`, with `α ≥ 0`, `γ > 0`.
///
/// This is the Green matrix for `α = (2μ+λ)|ξ|²`, `β = |ξ|`; the integrator
/// reuses it with `β = |ξ|/ε`.
pub fn green_block(t: f64, alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    let h = 0.5 * alpha;
    let det = gamma * beta * beta;
    let disc = det - h * h;
    if disc >= 0.0 {
        let r = libm::sqrt(disc);
        let x = r * t;
        let s = if libm::fabs(x) < SERIES_CUTOFF {
            let x2 = x * x;
            t * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
        } else {
            libm::sin(x) / r
        };
        let c = libm::cos(x);
        let e = libm::exp(-h * t);
        [[e * (c - h * s), e * beta * s], [-e * gamma * beta * s, e * (c + h * s)]]
    } else {
        // real roots slow > fast; S = (e^{slow t} − e^{fast t})/(slow − fast)
        let rho = libm::sqrt(-disc);
        let fast = -h - rho;
        let slow = det / fast;
        let e_fast = libm::exp(fast * t);
        let s = if 2.0 * rho * t < 1.0 {
            e_fast * libm::expm1(2.0 * rho * t) / (2.0 * rho)
        } else {
            (libm::exp(slow * t) - e_fast) / (2.0 * rho)
        };
        [[slow * s + e_fast, beta * s], [-gamma * beta * s, -fast * s + e_fast]]
    }
}

/// Green matrix `G(t, ξ)` acting on `(m̂, ẑ)`.
pub fn green_matrix(t: f64, k: f64, p: &GreenParams) -> Mat2 {
    green_block(t, p.nu() * k * k, k, p.gamma)
}

/// Fourier amplitudes of the Hodge variables at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeAmplitudes {
    pub m: f64,
    pub n: f64,
    pub z: f64,
}

impl ModeAmplitudes {
    pub fn norm_sq(&self) -> f64 {
        self.m * self.m + self.n * self.n + self.z * self.z
    }
}

/// Radially symmetric Fourier data `|ξ|^exponent · χ(|ξ|/cutoff) · weights`.
///
/// `n` carries the magnitude of the solenoidal part of `û`, so `|û|² = m̂² + n̂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub dim: usize,
    pub exponent: f64,
    /// Low-pass radius; `None` for no cutoff.
    pub cutoff: Option<f64>,
    pub weights: ModeAmplitudes,
}

impl RadialProfile {
    pub fn amplitude(&self, r: f64) -> ModeAmplitudes {
        if r <= 0.0 {
            return ModeAmplitudes::default();
        }
        let mut a = libm::pow(r, self.exponent);
        if let Some(c) = self.cutoff {
            a *= chi(r / c);
        }
        ModeAmplitudes { m: a * self.weights.m, n: a * self.weights.n, z: a * self.weights.z }
    }
}

/// Low-pass radius used by [`frak_b_profile`]; leaves blocks `k ≤ −1` untouched.
pub const PROFILE_CUTOFF: f64 = 16.0 / 9.0;

/// Data with flat dyadic Besov mass at regularity `σ₀`, i.e. amplitude
/// `|ξ|^{−σ₀−d/2}`, with equal weight on `m̂`, `n̂`, `ẑ`.
///
/// High frequencies are cut off smoothly because the slow overdamped
/// eigenvalue tends to `−γ/(2μ+λ)` and would otherwise never let them decay
/// algebraically.
pub fn frak_b_profile(sigma0: f64, dim: usize) -> Result<RadialProfile> {
    let half = dim as f64 / 2.0;
    if dim != 2 && dim != 3 {
        return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
    }
    if !(sigma0 >= -half && sigma0 < half - 2.0) {
        return Err(Error::Config(format!(
            "σ₀ = {sigma0} outside [{}, {})",
            -half,
            half - 2.0
        )));
    }
    Ok(RadialProfile {
        dim,
        exponent: -sigma0 - half,
        cutoff: Some(PROFILE_CUTOFF),
        weights: ModeAmplitudes { m: 1.0, n: 1.0, z: 1.0 },
    })
}

/// Evolve one radius: `(m̂, ẑ) ← G(t)(m̂, ẑ)`, `n̂ ← e^{−μk²t} n̂`.
pub fn evolve_mode(t: f64, k: f64, p: &GreenParams, a0: ModeAmplitudes) -> ModeAmplitudes {
    let g = green_matrix(t, k, p);
    ModeAmplitudes {
        m: g[0][0] * a0.m + g[0][1] * a0.z,
        n: libm::exp(-p.mu * k * k * t) * a0.n,
        z: g[1][0] * a0.m + g[1][1] * a0.z,
    }
}

/// Evolved amplitudes of `profile` at the given radii.
pub fn semigroup_apply(
    profile: &RadialProfile,
    p: &GreenParams,
    t: f64,
    radii: &[f64],
) -> Vec<ModeAmplitudes> {
    radii.iter().map(|&r| evolve_mode(t, r, p, profile.amplitude(r))).collect()
}

/// `(|m̂(t)|² + |ẑ(t)|²) / (e^{−2q|ξ|²t}(|m̂₀|² + |ẑ₀|²))` for `|ξ| ≤ β`.
pub fn lower_bound_ratio(
    t: f64,
    k: f64,
    beta: f64,
    p: &GreenParams,
    m0: f64,
    z0: f64,
) -> Result<f64> {
    if k > beta {
        return Err(Error::OutOfValidity { xi: k, beta });
    }
    let g = green_matrix(t, k, p);
    let m = g[0][0] * m0 + g[0][1] * z0;
    let z = g[1][0] * m0 + g[1][1] * z0;
    let base = m0 * m0 + z0 * z0;
    if base == 0.0 {
        return Ok(1.0);
    }
    Ok((m * m + z * z) / (libm::exp(-2.0 * p.q() * k * k * t) * base))
}

/// Smallest squared singular value of `e^{q|ξ|²t} G(t, ξ)`: the ratio of
/// [`lower_bound_ratio`] minimized over all data.
pub fn worst_lower_bound_ratio(t: f64, k: f64, p: &GreenParams) -> f64 {
    let g = green_matrix(t, k, p);
    let s = libm::exp(2.0 * p.q() * k * k * t);
    let (a, b, c, d) = (g[0][0], g[0][1], g[1][0], g[1][1]);
    let fro = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let root = libm::sqrt((fro * fro - 4.0 * det * det).max(0.0));
    // σ_min² = 2det²/(fro + root) avoids cancellation in (fro − root)/2
    let smin2 = if fro > 0.0 { 2.0 * det * det / (fro + root) } else { 0.0 };
    s * smin2
}

/// Result of the certified lower-bound sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundCertificate {
    /// Largest radius for which the worst ratio stays above the threshold.
    pub beta: f64,
    /// Infimum of the worst ratio over the grid below `beta`.
    pub infimum: f64,
    /// Smallest `c` with `|G(t)U₀|² ≥ ¼ e^{−2c|ξ|²t}|U₀|²` on the grid.
    pub sharpest_exponent: f64,
    /// Whether the time-free form `e^{−q|ξ|²}` also holds on the grid.
    pub time_free_form_holds: bool,
}

/// Minimum of [`worst_lower_bound_ratio`] over `times × (0, beta]` (`nk` radii).
pub fn lower_bound_infimum(p: &GreenParams, beta: f64, times: &[f64], nk: usize) -> f64 {
    let mut inf = f64::INFINITY;
    for i in 1..=nk {
        let k = beta * i as f64 / nk as f64;
        for &t in times {
            inf = inf.min(worst_lower_bound_ratio(t, k, p));
        }
    }
    inf
}

/// Largest `β ≤ threshold` (by bisection) whose grid infimum is at least `bound`.
pub fn certify_beta(
    p: &GreenParams,
    times: &[f64],
    nk: usize,
    bound: f64,
) -> Result<LowerBoundCertificate> {
    if times.is_empty() || nk == 0 {
        return Err(Error::InsufficientData("empty lower-bound grid".into()));
    }
    let mut hi = p.threshold();
    let mut lo = 0.0;
    if lower_bound_infimum(p, hi, times, nk) >= bound {
        lo = hi;
    } else {
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if lower_bound_infimum(p, mid, times, nk) >= bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    if lo == 0.0 {
        return Err(Error::Data("no positive radius satisfies the lower bound".into()));
    }
    let beta = lo;
    let infimum = lower_bound_infimum(p, beta, times, nk);
    let mut sharpest: f64 = 0.0;
    let mut time_free = true;
    for i in 1..=nk {
        let k = beta * i as f64 / nk as f64;
        for &t in times.iter().filter(|t| **t > 0.0) {
            let w = worst_lower_bound_ratio(t, k, p) * libm::exp(-2.0 * p.q() * k * k * t);
            sharpest = sharpest.max(-libm::log(4.0 * w) / (2.0 * k * k * t));
            if w < 0.25 * libm::exp(-2.0 * p.q() * k * k) {
                time_free = false;
            }
        }
    }
    Ok(LowerBoundCertificate {
        beta,
        infimum,
        sharpest_exponent: sharpest,
        time_free_form_holds: time_free,
    })
}

/// Quadrature settings for whole-space block norms on the radial axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialQuadrature {
    pub k_min: i32,
    pub k_max: i32,
    /// Log-spaced nodes per octave before refinement.
    pub nodes_per_shell: usize,
    /// Relative change tolerated between successive node doublings.
    pub tolerance: f64,
    pub max_doublings: usize,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        Self { k_min: -80, k_max: 1, nodes_per_shell: 64, tolerance: 1e-4, max_doublings: 2 }
    }
}

fn unit_sphere_area(dim: usize) -> f64 {
    use core::f64::consts::PI;
    match dim {
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `‖Δ̇_k f‖²_{L²}` for radial data with squared magnitude `mag2(ρ)`, by a
/// trapezoid rule in `log ρ` over the block support `2^k[3/4, 8/3]`.
fn block_mass<F: Fn(f64) -> f64>(dim: usize, k: i32, nodes_per_octave: usize, mag2: &F) -> f64 {
    let lo = libm::log(0.75 * pow2(k));
    let hi = libm::log(8.0 / 3.0 * pow2(k));
    let n = libm::ceil((hi - lo) / core::f64::consts::LN_2 * nodes_per_octave as f64) as usize;
    let h = (hi - lo) / n as f64;
    // the integrand vanishes with all derivatives at both ends
    let sum: f64 = (1..n)
        .map(|i| {
            let rho = libm::exp(lo + h * i as f64);
            let w = phi(rho / pow2(k));
            w * w * mag2(rho) * libm::pow(rho, dim as f64)
        })
        .sum();
    let plancherel = libm::pow(2.0 * core::f64::consts::PI, -(dim as f64));
    plancherel * unit_sphere_area(dim) * h * sum
}

/// `Σ_k 2^{kσ}‖Δ̇_k f‖_{L²}` for radial whole-space data.
pub fn radial_besov_norm<F: Fn(f64) -> f64>(
    dim: usize,
    sigma: f64,
    quad: &RadialQuadrature,
    nodes_per_octave: usize,
    mag2: F,
) -> f64 {
    (quad.k_min..=quad.k_max)
        .map(|k| libm::pow(2.0, k as f64 * sigma) * libm::sqrt(block_mass(dim, k, nodes_per_octave, &mag2)))
        .sum()
}

/// Per-block `L²` norms `‖Δ̇_k f‖` of radial data, `k` over the window.
pub fn radial_block_norms<F: Fn(f64) -> f64>(
    dim: usize,
    quad: &RadialQuadrature,
    mag2: F,
) -> Vec<(i32, f64)> {
    (quad.k_min..=quad.k_max)
        .map(|k| (k, libm::sqrt(block_mass(dim, k, quad.nodes_per_shell, &mag2))))
        .collect()
}

/// `‖(u_L, z_L)(t)‖_{Ḃ^σ_{2,1}}` of the linear evolution of `profile`, for
/// each time, with node doubling until the relative change is below tolerance.
pub fn decay_norm_curve(
    profile: &RadialProfile,
    p: &GreenParams,
    sigma: f64,
    times: &[f64],
    quad: &RadialQuadrature,
) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            let mag2 = |rho: f64| evolve_mode(t, rho, p, profile.amplitude(rho)).norm_sq();
            let mut nodes = quad.nodes_per_shell;
            let mut value = radial_besov_norm(profile.dim, sigma, quad, nodes, mag2);
            for _ in 0..quad.max_doublings {
                nodes *= 2;
                let refined = radial_besov_norm(profile.dim, sigma, quad, nodes, mag2);
                let change = libm::fabs(refined - value) / refined.abs().max(f64::MIN_POSITIVE);
                value = refined;
                if change < quad.tolerance {
                    return Ok(value);
                }
            }
            Err(Error::Accuracy { change: f64::NAN })
        })
        .collect()
}
