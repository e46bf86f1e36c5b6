//! The NST state `(a, u, z)` with `a = ρ − 1`, `z = P − 1`, its right-hand
//! sides, the transported mode `ω = γa − z` and the energy functionals.
//!
//! Both forms share one evaluator. With Mach number `ε` and viscosities
//! `(μ̄, λ̄)` the tendency is
//!
//! ```text
//! ∂t a = −div u/ε − div(au)
//! ∂t u = −u·∇u + (μ̄Δu + (μ̄+λ̄)∇div u − ∇z/ε)/(1+εa)
//! ∂t z = −γ div u/ε − u·∇z − γ z div u
//! ```
//!
//! and `ε = 1`, `(μ̄, λ̄) = (μ, λ)` gives the unscaled system. Products are formed
//! on the grid and truncated by the 2/3 rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{DerivativeKind, SpectralField};
use crate::greens::GreenParams;
use crate::grid::Grid;
use crate::lp::{time_norm, Exponent, FilterBank, Integrability};

pub const DEFAULT_VACUUM_FLOOR: f64 = 1e-3;

/// Fluid coefficients and Mach scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// Pressure constant `A` in `P = A(ρθ)^γ`.
    pub pressure_const: f64,
    pub mu_bar: f64,
    pub lambda_bar: f64,
    pub mach: f64,
    pub vacuum_floor: f64,
}

impl FluidParams {
    /// Unscaled parameters; `μ̄ = μ`, `λ̄ = λ`, `ε = 1`.
    pub fn new(mu: f64, lambda: f64, gamma: f64, pressure_const: f64) -> Result<Self> {
        let p = Self {
            mu,
            lambda,
            gamma,
            pressure_const,
            mu_bar: mu,
            lambda_bar: lambda,
            mach: 1.0,
            vacuum_floor: DEFAULT_VACUUM_FLOOR,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same fluid with Mach number `ε` and scaled viscosities `(μ̄, λ̄)`.
    pub fn with_mach(mut self, mach: f64, mu_bar: f64, lambda_bar: f64) -> Result<Self> {
        self.mach = mach;
        self.mu_bar = mu_bar;
        self.lambda_bar = lambda_bar;
        self.validate()?;
        Ok(self)
    }

    pub fn with_vacuum_floor(mut self, floor: f64) -> Result<Self> {
        self.vacuum_floor = floor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::Config(m));
        if !(self.mu > 0.0) || !(self.mu_bar > 0.0) {
            return bad(format!("viscosities must be positive (μ={}, μ̄={})", self.mu, self.mu_bar));
        }
        if !(2.0 * self.mu + self.lambda > 0.0) || !(2.0 * self.mu_bar + self.lambda_bar > 0.0) {
            return bad("2μ+λ must be positive".into());
        }
        if !(self.gamma > 1.0) {
            return bad(format!("γ must exceed 1, got {}", self.gamma));
        }
        if !(self.pressure_const > 0.0) {
            return bad(format!("A must be positive, got {}", self.pressure_const));
        }
        if !(self.mach > 0.0 && self.mach <= 1.0) {
            return bad(format!("Mach number must lie in (0, 1], got {}", self.mach));
        }
        if !(self.vacuum_floor > 0.0 && self.vacuum_floor < 1.0) {
            return bad(format!("vacuum floor must lie in (0, 1), got {}", self.vacuum_floor));
        }
        Ok(())
    }

    /// Coefficients of the unscaled system.
    pub fn unscaled(&self) -> Coefficients {
        Coefficients {
            mu: self.mu,
            lambda: self.lambda,
            gamma: self.gamma,
            mach: 1.0,
            vacuum_floor: self.vacuum_floor,
        }
    }

    /// Coefficients of the Mach-scaled system.
    pub fn scaled(&self) -> Coefficients {
        Coefficients {
            mu: self.mu_bar,
            lambda: self.lambda_bar,
            gamma: self.gamma,
            mach: self.mach,
            vacuum_floor: self.vacuum_floor,
        }
    }

    pub fn green_params(&self) -> GreenParams {
        GreenParams { mu: self.mu, lambda: self.lambda, gamma: self.gamma }
    }
}

/// The coefficients that enter one evaluation of the tendency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub mach: f64,
    pub vacuum_floor: f64,
}

/// Which terms of the tendency to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Full,
    /// Viscous and acoustic terms; integrated exactly by the time stepper.
    Linear,
    Nonlinear,
}

/// State `(a, u, z)` at a time stamp. Also used for tendencies.
#[derive(Debug, Clone, PartialEq)]
pub struct NstState {
    pub a: SpectralField,
    pub u: SpectralField,
    pub z: SpectralField,
    pub time: f64,
}

impl NstState {
    pub fn new(a: SpectralField, u: SpectralField, z: SpectralField, time: f64) -> Result<Self> {
        let g = a.grid();
        if u.grid() != g || z.grid() != g {
            return Err(Error::Shape("state fields live on different grids".into()));
        }
        if a.ncomp() != 1 || z.ncomp() != 1 || u.ncomp() != g.dim() {
            return Err(Error::Shape(format!(
                "state needs scalar a, z and a {}-vector u",
                g.dim()
            )));
        }
        Ok(Self { a, u, z, time })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            a: SpectralField::zeros(grid, 1),
            u: SpectralField::zeros(grid, grid.dim()),
            z: SpectralField::zeros(grid, 1),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// `self + s·other`, keeping `self.time`.
    pub fn axpy(&self, s: f64, other: &NstState) -> Result<NstState> {
        Ok(NstState {
            a: self.a.axpy(s, &other.a)?,
            u: self.u.axpy(s, &other.u)?,
            z: self.z.axpy(s, &other.z)?,
            time: self.time,
        })
    }

    pub fn scaled(&self, s: f64) -> NstState {
        NstState { a: self.a.scaled(s), u: self.u.scaled(s), z: self.z.scaled(s), time: self.time }
    }

    pub fn dealias(&mut self) {
        self.a.dealias();
        self.u.dealias();
        self.z.dealias();
    }

    /// `‖(a, u, z)‖_{L²}`.
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.a.l2_norm_sq() + self.u.l2_norm_sq() + self.z.l2_norm_sq())
    }

    /// `‖self − other‖_{L²}` over all three fields.
    pub fn distance(&self, other: &NstState) -> Result<f64> {
        Ok(self.axpy(-1.0, other)?.l2_norm())
    }

    /// Largest coefficient magnitude over all fields.
    pub fn max_coeff(&self) -> f64 {
        self.a.max_coeff().max(self.u.max_coeff()).max(self.z.max_coeff())
    }
}

fn check_floor(one_plus: &[f64], floor: f64) -> Result<()> {
    for (index, &value) in one_plus.iter().enumerate() {
        if !(value >= floor) {
            return Err(Error::Vacuum { value, floor, index });
        }
    }
    Ok(())
}

/// Pointwise `f(a) = −a/(1+a)`, guarded by `1 + a ≥ floor`.
pub fn f_of_a(a: &SpectralField, floor: f64) -> Result<SpectralField> {
    let vals = a.to_physical();
    let one_plus: Vec<f64> = vals.iter().map(|v| 1.0 + v).collect();
    check_floor(&one_plus, floor)?;
    let f: Vec<f64> = vals.iter().zip(&one_plus).map(|(a, o)| -a / o).collect();
    SpectralField::from_physical(a.grid(), 1, &f)
}

fn linear_terms(s: &NstState, c: &Coefficients) -> Result<NstState> {
    let div_u = s.u.derivative(DerivativeKind::Divergence)?;
    let visc = viscous(&s.u, c)?;
    let grad_z = s.z.derivative(DerivativeKind::Gradient)?;
    let e = c.mach;
    Ok(NstState {
        a: div_u.scaled(-1.0 / e),
        u: visc.axpy(-1.0 / e, &grad_z)?,
        z: div_u.scaled(-c.gamma / e),
        time: s.time,
    })
}

/// `μΔu + (μ+λ)∇div u`.
pub fn viscous(u: &SpectralField, c: &Coefficients) -> Result<SpectralField> {
    let lap = u.derivative(DerivativeKind::Laplacian)?;
    let grad_div = u
        .derivative(DerivativeKind::Divergence)?
        .derivative(DerivativeKind::Gradient)?;
    lap.scaled(c.mu).axpy(c.mu + c.lambda, &grad_div)
}

fn nonlinear_terms(s: &NstState, c: &Coefficients) -> Result<NstState> {
    let grid = s.grid();
    let d = grid.dim();
    let total = grid.total();
    let e = c.mach;

    let a = s.a.to_physical();
    let one_plus: Vec<f64> = a.iter().map(|v| 1.0 + e * v).collect();
    check_floor(&one_plus, c.vacuum_floor)?;

    let u = s.u.to_physical();
    let z = s.z.to_physical();
    let div_u = s.u.derivative(DerivativeKind::Divergence)?.to_physical();
    let grad_u = s.u.derivative(DerivativeKind::Gradient)?.to_physical();
    let grad_z = s.z.derivative(DerivativeKind::Gradient)?.to_physical();
    let visc = viscous(&s.u, c)?.to_physical();

    let mut au = vec![0.0; d * total];
    let mut du = vec![0.0; d * total];
    let mut dz = vec![0.0; total];
    for i in 0..total {
        let g = -e * a[i] / one_plus[i];
        let mut adv_z = 0.0;
        for j in 0..d {
            adv_z += u[j * total + i] * grad_z[j * total + i];
        }
        dz[i] = -adv_z - c.gamma * z[i] * div_u[i];
        for comp in 0..d {
            let k = comp * total + i;
            au[k] = a[i] * u[k];
            let mut adv = 0.0;
            for j in 0..d {
                adv += u[j * total + i] * grad_u[(comp * d + j) * total + i];
            }
            du[k] = -adv + g * (visc[k] - grad_z[k] / e);
        }
    }
    let mut au = SpectralField::from_physical(grid, d, &au)?;
    au.dealias();
    let mut du = SpectralField::from_physical(grid, d, &du)?;
    du.dealias();
    let mut dz = SpectralField::from_physical(grid, 1, &dz)?;
    dz.dealias();
    Ok(NstState {
        a: au.derivative(DerivativeKind::Divergence)?.scaled(-1.0),
        u: du,
        z: dz,
        time: s.time,
    })
}

/// Tendency `(∂t a, ∂t u, ∂t z)` with the given coefficients.
pub fn tendency(s: &NstState, c: &Coefficients, part: Part) -> Result<NstState> {
    if !(c.mach > 0.0) {
        return Err(Error::Config(format!("Mach number must be positive, got {}", c.mach)));
    }
    match part {
        Part::Linear => linear_terms(s, c),
        Part::Nonlinear => nonlinear_terms(s, c),
        Part::Full => linear_terms(s, c)?.axpy(1.0, &nonlinear_terms(s, c)?),
    }
}

/// Tendency of the unscaled system.
pub fn rhs_unscaled(s: &NstState, p: &FluidParams) -> Result<NstState> {
    tendency(s, &p.unscaled(), Part::Full)
}

/// Tendency of the Mach-scaled system at `p.mach`.
pub fn rhs_scaled(s: &NstState, p: &FluidParams) -> Result<NstState> {
    tendency(s, &p.scaled(), Part::Full)
}

/// `ω = γa − z`.
pub fn omega(s: &NstState, gamma: f64) -> Result<SpectralField> {
    s.a.scaled(gamma).sub(&s.z)
}

/// `−u·∇ω − ω div u + (γ−1) z div u`.
pub fn omega_rhs(s: &NstState, gamma: f64) -> Result<SpectralField> {
    omega_rhs_of(&omega(s, gamma)?, &s.u, &s.z, gamma)
}

/// Transport tendency of an independently carried `ω`.
pub fn omega_rhs_of(
    w: &SpectralField,
    u: &SpectralField,
    z: &SpectralField,
    gamma: f64,
) -> Result<SpectralField> {
    let grid = w.grid();
    let d = grid.dim();
    let total = grid.total();
    let wv = w.to_physical();
    let zv = z.to_physical();
    let uv = u.to_physical();
    let gw = w.derivative(DerivativeKind::Gradient)?.to_physical();
    let div_u = u.derivative(DerivativeKind::Divergence)?.to_physical();
    let out: Vec<f64> = (0..total)
        .map(|i| {
            let adv: f64 = (0..d).map(|j| uv[j * total + i] * gw[j * total + i]).sum();
            -adv - wv[i] * div_u[i] + (gamma - 1.0) * zv[i] * div_u[i]
        })
        .collect();
    let mut f = SpectralField::from_physical(grid, 1, &out)?;
    f.dealias();
    Ok(f)
}

/// Physical variables on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFields {
    pub rho: Vec<f64>,
    pub pressure: Vec<f64>,
    pub theta: Vec<f64>,
}

/// `ρ = 1+a`, `P = 1+z`, `θ = (P/A)^{1/γ}/ρ`.
pub fn recover_physical(s: &NstState, p: &FluidParams) -> Result<PhysicalFields> {
    let rho: Vec<f64> = s.a.to_physical().iter().map(|a| 1.0 + a).collect();
    check_floor(&rho, p.vacuum_floor)?;
    let pressure: Vec<f64> = s.z.to_physical().iter().map(|z| 1.0 + z).collect();
    if let Some((index, &value)) = pressure.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Recovery { value, index });
    }
    let theta = rho
        .iter()
        .zip(&pressure)
        .map(|(r, pr)| libm::pow(pr / p.pressure_const, 1.0 / p.gamma) / r)
        .collect();
    Ok(PhysicalFields { rho, pressure, theta })
}

/// `∫ρ dx`, exact for the trigonometric interpolant.
pub fn total_mass(s: &NstState) -> f64 {
    s.grid().volume() * (1.0 + s.a.mean(0))
}

/// `∫ρθ dx` by the rectangle rule.
pub fn total_rho_theta(s: &NstState, p: &FluidParams) -> Result<f64> {
    let phys = recover_physical(s, p)?;
    let sum: f64 = phys.rho.iter().zip(&phys.theta).map(|(r, t)| r * t).sum();
    Ok(s.grid().cell_volume() * sum)
}

/// The energy functionals at the last time of a series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Functionals {
    /// Initial-data norm `𝒳₀`.
    pub x0: f64,
    /// `𝒳(t)`.
    pub x: f64,
    /// Dissipation `𝒟(t)`.
    pub d: f64,
    /// `ℰ(t)`.
    pub e: f64,
}

struct BlockTables {
    a: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
}

fn weighted_sum(bank: &FilterBank, per_block: &[f64], s_low: f64, s_high: f64, split: i32) -> f64 {
    bank.blocks()
        .zip(per_block)
        .map(|(k, v)| libm::pow(2.0, k as f64 * if k < split { s_low } else { s_high }) * v)
        .sum()
}

fn column_norm(times: &[f64], table: &[Vec<f64>], block: usize, kappa: Exponent) -> f64 {
    if kappa != Exponent::Infinity && table.len() < 2 {
        return 0.0;
    }
    time_norm(times, table.iter().map(|row| row[block]), kappa)
}

fn time_blocks(times: &[f64], table: &[Vec<f64>], nblocks: usize, kappa: Exponent) -> Vec<f64> {
    (0..nblocks).map(|b| column_norm(times, table, b, kappa)).collect()
}

/// `𝒳₀`, `𝒳(t)`, `𝒟(t)`, `ℰ(t)` of a time-sampled solution, with Chemin–Lerner
/// norms taken block by block. The sum-space norm of `z` uses `Ḃ^{d/2+1}` on
/// blocks `k ≤ −1` and `Ḃ^{d/2}` on `k ≥ 0`. A single snapshot gives zero for
/// every time-integrated term.
pub fn energy_functionals(
    bank: &FilterBank,
    times: &[f64],
    series: &[NstState],
) -> Result<Functionals> {
    if series.is_empty() {
        return Err(Error::InsufficientData("empty state series".into()));
    }
    if times.len() != series.len() {
        return Err(Error::Shape(format!("{} times for {} states", times.len(), series.len())));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Data("time stamps must be strictly increasing".into()));
    }
    let two = Integrability::Two;
    let tables = BlockTables {
        a: series.iter().map(|s| bank.block_norms(&s.a, two)).collect(),
        u: series.iter().map(|s| bank.block_norms(&s.u, two)).collect(),
        z: series.iter().map(|s| bank.block_norms(&s.z, two)).collect(),
    };
    let half = series[0].grid().dim() as f64 / 2.0;
    let nb = (bank.k_max() - bank.k_min() + 1) as usize;
    let at = |row: &[f64], s: f64| weighted_sum(bank, row, s, s, 0);

    let x0 = at(&tables.a[0], half - 1.0)
        + at(&tables.z[0], half - 1.0)
        + at(&tables.a[0], half)
        + at(&tables.z[0], half)
        + at(&tables.u[0], half - 1.0);

    let sup_a = time_blocks(times, &tables.a, nb, Exponent::Infinity);
    let sup_z = time_blocks(times, &tables.z, nb, Exponent::Infinity);
    let sup_u = time_blocks(times, &tables.u, nb, Exponent::Infinity);
    let int_u = time_blocks(times, &tables.u, nb, Exponent::One);
    let int_z = time_blocks(times, &tables.z, nb, Exponent::One);

    let u_diss = at(&int_u, half + 1.0);
    let z_diss = weighted_sum(bank, &int_z, half + 1.0, half, 0);
    let d = u_diss + z_diss;
    let x = at(&sup_a, half) + at(&sup_z, half) + at(&sup_u, half - 1.0) + u_diss;
    let e = at(&sup_a, half - 1.0)
        + at(&sup_z, half - 1.0)
        + at(&sup_a, half)
        + at(&sup_z, half)
        + at(&sup_u, half - 1.0)
        + d;
    Ok(Functionals { x0, x, d, e })
}

/// `‖a‖_{Ḃ^{d/2}_{2,1}}`, the density diagnostic tracked by the nonlinear runs.
pub fn density_diagnostic(bank: &FilterBank, s: &NstState) -> f64 {
    let half = s.grid().dim() as f64 / 2.0;
    bank.besov_norm(&s.a, &crate::lp::BesovSpec::l2_sum(half))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(2, 16, 2.0 * core::f64::consts::PI).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FluidParams::new(1.0, 0.0, 1.4, 1.0).is_ok());
        assert!(FluidParams::new(0.0, 0.0, 1.4, 1.0).is_err());
        assert!(FluidParams::new(1.0, -3.0, 1.4, 1.0).is_err());
        assert!(FluidParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        let p = FluidParams::new(1.0, 0.0, 1.4, 1.0).unwrap();
        assert!(p.with_mach(0.0, 1.0, 0.0).is_err());
        assert!(p.with_mach(1.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn f_of_a_values() {
        let g = grid();
        let f = f_of_a(&SpectralField::constant(&g, 0.0), 1e-3).unwrap();
        assert!(f.max_coeff() == 0.0);
        let f = f_of_a(&SpectralField::constant(&g, 1.0), 1e-3).unwrap();
        assert!((f.mean(0) + 0.5).abs() < 1e-15);
        let err = f_of_a(&SpectralField::constant(&g, -1.0 + 1e-9), 1e-6).unwrap_err();
        assert!(matches!(err, Error::Vacuum { index: 0, .. }));
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = grid();
        let s = NstState::new(
            SpectralField::constant(&g, 0.2),
            SpectralField::zeros(&g, 2),
            SpectralField::constant(&g, 0.1),
            0.0,
        )
        .unwrap();
        let p = FluidParams::new(1.0, 0.0, 1.4, 1.0).unwrap();
        assert!(rhs_unscaled(&s, &p).unwrap().max_coeff() < 1e-15);
        assert!(rhs_scaled(&s, &p.with_mach(0.1, 1.0, 0.0).unwrap()).unwrap().max_coeff() < 1e-15);
    }

    #[test]
    fn omega_arithmetic() {
        let g = grid();
        let s = NstState::new(
            SpectralField::constant(&g, 0.1),
            SpectralField::zeros(&g, 2),
            SpectralField::constant(&g, 0.05),
            0.0,
        )
        .unwrap();
        let w = omega(&s, 1.4).unwrap();
        assert!((w.mean(0) - 0.09).abs() < 1e-15);
        assert!(omega_rhs(&s, 1.4).unwrap().max_coeff() < 1e-15);
    }

    #[test]
    fn recovery_reference_values() {
        let g = grid();
        let p = FluidParams::new(1.0, 0.0, 2.0, 1.0).unwrap();
        let mut s = NstState::zeros(&g);
        let phys = recover_physical(&s, &p).unwrap();
        assert!(phys.theta.iter().all(|t| (t - 1.0).abs() < 1e-15));
        s.z = SpectralField::constant(&g, 3.0);
        let phys = recover_physical(&s, &p).unwrap();
        assert!(phys.theta.iter().all(|t| (t - 2.0).abs() < 1e-14));
        s.z = SpectralField::constant(&g, -1.5);
        assert!(matches!(recover_physical(&s, &p), Err(Error::Recovery { .. })));
    }

    #[test]
    fn functionals_need_data() {
        let g = grid();
        let bank = FilterBank::covering(&g, 4);
        assert!(energy_functionals(&bank, &[], &[]).is_err());
        let f = energy_functionals(&bank, &[0.0], &[NstState::zeros(&g)]).unwrap();
        assert_eq!(f, Functionals::default());
    }
}
