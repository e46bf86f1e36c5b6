//! Discrete Littlewood–Paley decomposition, homogeneous Besov norms and
//! Chemin–Lerner mixed norms.
//!
//! Blocks are radial Fourier multipliers `φ(2^{-k}|ξ|)` with
//! `φ(ξ) = χ(ξ/2) − χ(ξ)`, where `χ` is a smooth non-increasing bump equal to
//! one on `|ξ| ≤ 3/4` and vanishing for `|ξ| ≥ 4/3`. `φ` is exactly zero
//! outside `[3/4, 8/3]`, so blocks with `|k − l| ≥ 2` have disjoint support.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        libm::exp(-1.0 / x)
    } else {
        0.0
    }
}

/// Radial low-pass profile `χ(|ξ|)`.
pub fn chi(r: f64) -> f64 {
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        let rho = (r - INNER) / (OUTER - INNER);
        let a = bump(1.0 - rho);
        let b = bump(rho);
        a / (a + b)
    }
}

/// Annular profile `φ(|ξ|) = χ(|ξ|/2) − χ(|ξ|)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// `2^k` for integer `k`.
pub fn pow2(k: i32) -> f64 {
    libm::ldexp(1.0, k)
}

/// Spatial integrability index of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrability {
    Two,
    /// `p > 2`, finite.
    Finite(f64),
    Infinity,
}

/// Summation index `r` over blocks (also used for the time exponent of
/// Chemin–Lerner norms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

/// Which blocks enter a restricted norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyRange {
    All,
    /// `k ≤ 0`.
    Low,
    /// `k ≥ −1`.
    High,
    /// `2^k ε ≤ 2^{k₀}`.
    LowEps(f64),
    /// `2^k ε ≥ 2^{k₀}`.
    HighEps(f64),
}

/// Parameters of a homogeneous Besov norm `Ḃ^s_{p,r}` restricted to a range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Integrability,
    pub r: Exponent,
    pub range: FrequencyRange,
}

impl BesovSpec {
    pub fn new(s: f64, p: Integrability, r: Exponent, range: FrequencyRange) -> Result<Self> {
        if let Integrability::Finite(p) = p {
            if !(p > 2.0 && p.is_finite()) {
                return Err(Error::Config(format!("finite integrability must exceed 2, got {p}")));
            }
        }
        match range {
            FrequencyRange::LowEps(e) | FrequencyRange::HighEps(e) if !(e > 0.0) => {
                return Err(Error::Config(format!("ε must be positive, got {e}")));
            }
            _ => {}
        }
        Ok(Self { s, p, r, range })
    }

    /// `Ḃ^s_{2,1}` over all blocks, the workhorse of the diagnostics.
    pub fn l2_sum(s: f64) -> Self {
        Self { s, p: Integrability::Two, r: Exponent::One, range: FrequencyRange::All }
    }

    pub fn with_range(mut self, range: FrequencyRange) -> Self {
        self.range = range;
        self
    }
}

/// Dyadic filter bank over the block window `[k_min, k_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterBank {
    k_min: i32,
    k_max: i32,
    k0: u32,
}

impl FilterBank {
    /// Bank without a coverage check (used on the continuous radial axis).
    pub fn new(k_min: i32, k_max: i32, k0: u32) -> Result<Self> {
        if k_min >= k_max {
            return Err(Error::Config(format!("empty block window [{k_min}, {k_max}]")));
        }
        Ok(Self { k_min, k_max, k0 })
    }

    /// Bank whose window must cover every nonzero radius in `radii`, i.e.
    /// `2^{k_min}·4/3 ≤ r ≤ 2^{k_max+1}·3/4`, where the partition is exact.
    pub fn for_radii(radii: &[f64], k_min: i32, k_max: i32, k0: u32) -> Result<Self> {
        let bank = Self::new(k_min, k_max, k0)?;
        let (lo, hi) = bank.covered_band();
        let mut uncovered: Vec<f64> = radii
            .iter()
            .copied()
            .filter(|&r| r > 0.0 && (r < lo || r > hi))
            .collect();
        if !uncovered.is_empty() {
            uncovered.sort_by(f64::total_cmp);
            uncovered.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
            return Err(Error::Uncovered { uncovered });
        }
        Ok(bank)
    }

    /// Bank over an explicit window, checked against the grid lattice.
    pub fn for_grid(grid: &Grid, k_min: i32, k_max: i32, k0: u32) -> Result<Self> {
        let radii: Vec<f64> = (0..grid.total()).map(|i| grid.xi_norm(i)).collect();
        Self::for_radii(&radii, k_min, k_max, k0)
    }

    /// Narrowest window covering the grid's resolvable band.
    pub fn covering(grid: &Grid, k0: u32) -> Self {
        let lo = grid.frequency_unit();
        let hi = grid.max_xi_norm();
        let k_min = libm::floor(libm::log2(lo * INNER)) as i32;
        let k_max = libm::ceil(libm::log2(hi / INNER) - 1.0) as i32;
        Self { k_min, k_max: k_max.max(k_min + 1), k0 }
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    /// Radii on which `Σ_k φ(2^{-k}·) = 1` holds exactly.
    pub fn covered_band(&self) -> (f64, f64) {
        (pow2(self.k_min) * OUTER, pow2(self.k_max + 1) * INNER)
    }

    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    /// Multiplier of block `k` at radius `r`.
    pub fn weight(&self, k: i32, r: f64) -> f64 {
        phi(r / pow2(k))
    }

    fn check_block(&self, k: i32) -> Result<()> {
        if k < self.k_min || k > self.k_max {
            return Err(Error::BlockRange { k, k_min: self.k_min, k_max: self.k_max });
        }
        Ok(())
    }

    /// Whether block `k` is selected by `range`.
    pub fn selects(&self, k: i32, range: FrequencyRange) -> bool {
        match range {
            FrequencyRange::All => true,
            FrequencyRange::Low => k <= 0,
            FrequencyRange::High => k >= -1,
            FrequencyRange::LowEps(eps) => pow2(k) * eps <= pow2(self.k0 as i32),
            FrequencyRange::HighEps(eps) => pow2(k) * eps >= pow2(self.k0 as i32),
        }
    }

    /// Selected block indices inside the window.
    pub fn selected(&self, range: FrequencyRange) -> Vec<i32> {
        self.blocks().filter(|&k| self.selects(k, range)).collect()
    }

    /// `Δ̇_k f`.
    pub fn dyadic_block(&self, f: &SpectralField, k: i32) -> Result<SpectralField> {
        self.check_block(k)?;
        let grid = f.grid();
        let scale = pow2(k);
        Ok(f.map_modes(|idx| num_complex::Complex64::new(phi(grid.xi_norm(idx) / scale), 0.0)))
    }

    /// `f^ℓ = Σ_{k ≤ −1} Δ̇_k f` (field split convention).
    pub fn low_part(&self, f: &SpectralField) -> SpectralField {
        self.partial_sum(f, |k| k <= -1)
    }

    /// `f^h = Σ_{k ≥ 0} Δ̇_k f`.
    pub fn high_part(&self, f: &SpectralField) -> SpectralField {
        self.partial_sum(f, |k| k >= 0)
    }

    /// `Σ Δ̇_k f` over blocks selected by `keep`.
    pub fn partial_sum<P: Fn(i32) -> bool>(&self, f: &SpectralField, keep: P) -> SpectralField {
        let grid = f.grid();
        let ks: Vec<i32> = self.blocks().filter(|&k| keep(k)).collect();
        f.map_modes(|idx| {
            let r = grid.xi_norm(idx);
            let w: f64 = ks.iter().map(|&k| self.weight(k, r)).sum();
            num_complex::Complex64::new(w, 0.0)
        })
    }

    /// `‖Δ̇_k f‖_{L^p}` for every block of the window, in window order.
    pub fn block_norms(&self, f: &SpectralField, p: Integrability) -> Vec<f64> {
        let grid = f.grid();
        let total = grid.total();
        match p {
            Integrability::Two => {
                let mut acc = vec![0.0; (self.k_max - self.k_min + 1) as usize];
                for idx in 1..total {
                    let r = grid.xi_norm(idx);
                    let mass: f64 = (0..f.ncomp())
                        .map(|c| f.component_coeffs(c)[idx].norm_sqr())
                        .sum();
                    if mass == 0.0 {
                        continue;
                    }
                    // at most two blocks overlap a given radius
                    let kc = libm::floor(libm::log2(r)) as i32;
                    for k in (kc - 2)..=(kc + 1) {
                        if k < self.k_min || k > self.k_max {
                            continue;
                        }
                        let w = self.weight(k, r);
                        if w != 0.0 {
                            acc[(k - self.k_min) as usize] += w * w * mass;
                        }
                    }
                }
                acc.iter().map(|m| libm::sqrt(grid.volume() * m)).collect()
            }
            _ => self
                .blocks()
                .map(|k| {
                    let block = self.dyadic_block(f, k).expect("k inside window");
                    lp_norm_physical(&block, p)
                })
                .collect(),
        }
    }

    /// `ℓ^r` aggregation of `2^{ks}‖Δ̇_k f‖_{L^p}` over the selected range.
    ///
    /// An empty range yields zero; callers flag it with [`FilterBank::selected`].
    pub fn besov_norm(&self, f: &SpectralField, spec: &BesovSpec) -> f64 {
        let norms = self.block_norms(f, spec.p);
        self.aggregate(&norms, spec)
    }

    /// Aggregate precomputed per-block quantities (window order) as a Besov norm.
    pub fn aggregate(&self, block_values: &[f64], spec: &BesovSpec) -> f64 {
        let weighted = self
            .blocks()
            .zip(block_values.iter())
            .filter(|(k, _)| self.selects(*k, spec.range))
            .map(|(k, v)| libm::pow(2.0, k as f64 * spec.s) * v);
        match spec.r {
            Exponent::One => weighted.sum(),
            Exponent::Two => libm::sqrt(weighted.map(|v| v * v).sum()),
            Exponent::Infinity => weighted.fold(0.0, f64::max),
        }
    }

    /// Chemin–Lerner norm `‖f‖_{L̃^κ_T(Ḃ^s_{p,r})}` of a time-sampled series.
    pub fn chemin_lerner_norm(
        &self,
        times: &[f64],
        series: &[SpectralField],
        kappa: Exponent,
        spec: &BesovSpec,
    ) -> Result<f64> {
        if times.len() != series.len() {
            return Err(Error::Shape(format!(
                "{} time stamps for {} snapshots",
                times.len(),
                series.len()
            )));
        }
        let table: Vec<Vec<f64>> = series.iter().map(|f| self.block_norms(f, spec.p)).collect();
        self.chemin_lerner_from_table(times, &table, kappa, spec)
    }

    /// Chemin–Lerner norm from a table of per-snapshot block norms.
    pub fn chemin_lerner_from_table(
        &self,
        times: &[f64],
        table: &[Vec<f64>],
        kappa: Exponent,
        spec: &BesovSpec,
    ) -> Result<f64> {
        if table.is_empty() || (kappa != Exponent::Infinity && table.len() < 2) {
            return Err(Error::InsufficientData(format!(
                "{} samples for a time-L^{kappa:?} norm",
                table.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("time stamps must be strictly increasing".into()));
        }
        let nblocks = (self.k_max - self.k_min + 1) as usize;
        let per_block: Vec<f64> = (0..nblocks)
            .map(|b| {
                let col = table.iter().map(|row| row[b]);
                time_norm(times, col, kappa)
            })
            .collect();
        Ok(self.aggregate(&per_block, spec))
    }
}

/// Time-`L^κ` norm of samples by trapezoid quadrature (max for `κ = ∞`).
pub fn time_norm<I: Iterator<Item = f64>>(times: &[f64], values: I, kappa: Exponent) -> f64 {
    let v: Vec<f64> = values.collect();
    match kappa {
        Exponent::Infinity => v.iter().cloned().fold(0.0, f64::max),
        Exponent::One => trapezoid(times, &v),
        Exponent::Two => {
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            libm::sqrt(trapezoid(times, &sq))
        }
    }
}

pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `‖f‖_{L^p}` by rectangle-rule quadrature of physical samples; vector fields
/// use the pointwise Euclidean magnitude.
pub fn lp_norm_physical(f: &SpectralField, p: Integrability) -> f64 {
    let total = f.grid().total();
    let phys = f.to_physical();
    let mags = (0..total).map(|i| {
        libm::sqrt((0..f.ncomp()).map(|c| phys[c * total + i] * phys[c * total + i]).sum::<f64>())
    });
    match p {
        Integrability::Infinity => mags.fold(0.0, f64::max),
        Integrability::Two => libm::sqrt(f.grid().cell_volume() * mags.map(|m| m * m).sum::<f64>()),
        Integrability::Finite(p) => libm::pow(
            f.grid().cell_volume() * mags.map(|m| libm::pow(m, p)).sum::<f64>(),
            1.0 / p,
        ),
    }
}
