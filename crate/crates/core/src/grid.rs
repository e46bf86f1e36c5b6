//! Periodic grids and their frequency lattice.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{config, Result};
use crate::fft::Radix2;

/// A periodic box `[0, L)^d` sampled with `N` points per axis.
///
/// The frequency lattice is `ξ = 2π j / L` with `j ∈ [−N/2, N/2)^d`. Grids are
/// immutable and cheap to clone (shared tables live behind `Arc`).
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    plan: Arc<Radix2>,
    xi: Arc<Vec<[f64; 3]>>,
    xi_sq: Arc<Vec<f64>>,
    xi_deriv: Arc<Vec<[f64; 3]>>,
    neg: Arc<Vec<usize>>,
    keep: Arc<Vec<bool>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

impl Grid {
    /// Build a grid; `dim ∈ {2, 3}`, `n` an even power of two with `n ≥ 8`, `length > 0`.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(config(alloc::format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(config(alloc::format!("points per axis must be even and >= 8, got {n}")));
        }
        if !n.is_power_of_two() {
            return Err(config(alloc::format!("points per axis must be a power of two, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(config(alloc::format!("box length must be positive, got {length}")));
        }
        let total = n.pow(dim as u32);
        let unit = 2.0 * core::f64::consts::PI / length;
        let mut xi = Vec::with_capacity(total);
        let mut xi_sq = Vec::with_capacity(total);
        let mut xi_deriv = Vec::with_capacity(total);
        let mut neg = Vec::with_capacity(total);
        let mut keep = Vec::with_capacity(total);
        let cut = (n / 3) as i64;
        for idx in 0..total {
            let modes = mode_of(idx, dim, n);
            let flipped = modes[..dim]
                .iter()
                .fold(0usize, |acc, &m| acc * n + (-m).rem_euclid(n as i64) as usize);
            neg.push(flipped);
            keep.push(modes[..dim].iter().all(|m| m.abs() <= cut));
            let mut v = [0.0; 3];
            for a in 0..dim {
                v[a] = unit * modes[a] as f64;
            }
            xi_sq.push(v.iter().map(|c| c * c).sum());
            xi.push(v);
            let mut w = v;
            for a in 0..dim {
                if modes[a] == -((n / 2) as i64) {
                    w[a] = 0.0;
                }
            }
            xi_deriv.push(w);
        }
        Ok(Self {
            dim,
            n,
            length,
            plan: Arc::new(Radix2::new(n)),
            xi: Arc::new(xi),
            xi_sq: Arc::new(xi_sq),
            xi_deriv: Arc::new(xi_deriv),
            neg: Arc::new(neg),
            keep: Arc::new(keep),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of grid points (= number of Fourier modes).
    pub fn total(&self) -> usize {
        self.xi_sq.len()
    }

    /// Mesh spacing `L/N`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        libm::pow(self.length, self.dim as f64)
    }

    /// Cell volume `(L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing(), self.dim as f64)
    }

    /// Lattice spacing `2π/L`.
    pub fn frequency_unit(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.length
    }

    pub(crate) fn plan(&self) -> &Radix2 {
        &self.plan
    }

    /// Integer mode numbers of a flat index (unused axes are 0).
    pub fn modes(&self, idx: usize) -> [i64; 3] {
        mode_of(idx, self.dim, self.n)
    }

    /// Flat index of an integer mode vector; components are taken modulo `N`.
    pub fn index_of(&self, modes: &[i64]) -> usize {
        let n = self.n as i64;
        modes[..self.dim]
            .iter()
            .fold(0usize, |acc, &m| acc * self.n + m.rem_euclid(n) as usize)
    }

    /// Physical frequency vector `ξ` of a mode.
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        self.xi[idx]
    }

    /// `ξ` with components on the Nyquist index zeroed; the symbol used for
    /// first derivatives so that derivatives of real fields stay real.
    pub fn xi_deriv(&self, idx: usize) -> [f64; 3] {
        self.xi_deriv[idx]
    }

    pub fn xi_sq(&self, idx: usize) -> f64 {
        self.xi_sq[idx]
    }

    pub fn xi_norm(&self, idx: usize) -> f64 {
        libm::sqrt(self.xi_sq[idx])
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let mut rem = idx;
        let mut p = [0.0; 3];
        for a in (0..self.dim).rev() {
            p[a] = h * (rem % self.n) as f64;
            rem /= self.n;
        }
        p
    }

    /// True when some axis sits on the unpaired Nyquist index `−N/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = (self.n / 2) as i64;
        self.modes(idx)[..self.dim].iter().any(|&m| m == -half)
    }

    /// 2/3-rule mask: keep modes with every `|j_a| ≤ N/3`.
    pub fn dealias_keep(&self, idx: usize) -> bool {
        self.keep[idx]
    }

    /// Flat index of the mode `−ξ`.
    pub fn negated(&self, idx: usize) -> usize {
        self.neg[idx]
    }

    /// Largest resolvable `|ξ|` on the lattice.
    pub fn max_xi_norm(&self) -> f64 {
        libm::sqrt(self.xi_sq.iter().cloned().fold(0.0, f64::max))
    }
}

fn mode_of(idx: usize, dim: usize, n: usize) -> [i64; 3] {
    let mut rem = idx;
    let mut out = [0i64; 3];
    for a in (0..dim).rev() {
        let j = rem % n;
        rem /= n;
        out[a] = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
    }
    out
}
