//! Time stepping with the viscous–acoustic part integrated exactly in Fourier
//! space.
//!
//! Per mode the linear system couples `â` and `ẑ` only to the longitudinal
//! velocity `m̂ = i ξ̂·û`; `(m̂, ẑ)` follows [`green_block`], the transverse
//! velocity is heat-damped, and `γâ − ẑ` is conserved, which fixes `â`.
//! First derivatives use the Nyquist-zeroed symbol of the grid, so the
//! propagator is the exact exponential of the discrete linear operator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::greens::green_block;
use crate::grid::Grid;
use crate::nst::{omega, omega_rhs_of, tendency, Coefficients, NstState, Part};
use crate::oracle::Matrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Half exact linear step, Heun step on the remainder, half linear step.
    SplitStep,
    /// First-order implicit linear / explicit nonlinear reference.
    ImexEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    /// Floor for CFL step halving.
    pub dt_min: f64,
    /// Advective CFL number: `dt ≤ cfl·h/max|u|`.
    pub cfl: f64,
    pub t_end: f64,
    /// Record a snapshot every this many nominal steps.
    pub snapshot_every: usize,
    pub dealias: bool,
    /// Drop the nonlinear terms (the forcing is still applied).
    pub linear_only: bool,
    /// Carry `ω` with its own transport equation alongside the state.
    pub track_omega: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::SplitStep,
            dt: 1e-2,
            dt_min: 1e-8,
            cfl: 0.5,
            t_end: 1.0,
            snapshot_every: 10,
            dealias: true,
            linear_only: false,
            track_omega: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("Δt must be positive, got {}", self.dt)));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt) {
            return Err(Error::Config(format!("Δt_min must lie in (0, Δt], got {}", self.dt_min)));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!("CFL number must be positive, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("end time must be nonnegative, got {}", self.t_end)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot cadence must be at least one step".into()));
        }
        Ok(())
    }

    /// Number of nominal steps to reach `t_end`.
    pub fn steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }
}

/// Exact linear propagator `exp(Δt L)` for one step size, tabulated per mode.
#[derive(Debug, Clone)]
pub struct ModePropagator {
    dt: f64,
    gamma: f64,
    /// `[g11, g12, g21, g22, heat]` per mode.
    table: Vec<[f64; 5]>,
}

impl ModePropagator {
    pub fn new(grid: &Grid, c: &Coefficients, dt: f64) -> Self {
        let table = (0..grid.total())
            .map(|idx| {
                let k2 = grid.xi_sq(idx);
                let kd = norm3(grid.xi_deriv(idx));
                let heat = libm::exp(-c.mu * k2 * dt);
                let alpha = c.mu * k2 + (c.mu + c.lambda) * kd * kd;
                let g = green_block(dt, alpha, kd / c.mach, c.gamma);
                [g[0][0], g[0][1], g[1][0], g[1][1], heat]
            })
            .collect();
        Self { dt, gamma: c.gamma, table }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `s` by the linear flow; the time stamp moves by `dt`.
    pub fn apply(&self, s: &NstState) -> NstState {
        let grid = s.grid();
        let d = grid.dim();
        let total = grid.total();
        let mut out = s.clone();
        out.time += self.dt;
        for idx in 0..total {
            let [g11, g12, g21, g22, heat] = self.table[idx];
            let xd = grid.xi_deriv(idx);
            let kd = norm3(xd);
            let u: Vec<Complex64> = (0..d).map(|c| s.u.component_coeffs(c)[idx]).collect();
            if kd == 0.0 {
                for c in 0..d {
                    out.u.component_coeffs_mut(c)[idx] = u[c] * heat;
                }
                continue;
            }
            let dir: Vec<f64> = (0..d).map(|c| xd[c] / kd).collect();
            let p: Complex64 = (0..d).map(|c| u[c] * dir[c]).sum();
            let m = I * p;
            let z = s.z.coeffs()[idx];
            let m_new = m * g11 + z * g12;
            let z_new = m * g21 + z * g22;
            let p_new = -I * m_new;
            for c in 0..d {
                out.u.component_coeffs_mut(c)[idx] = (u[c] - p * dir[c]) * heat + p_new * dir[c];
            }
            out.z.coeffs_mut()[idx] = z_new;
            out.a.coeffs_mut()[idx] = s.a.coeffs()[idx] + (z_new - z) / self.gamma;
        }
        out
    }

    /// Matrix of the propagator at one mode on `(â, û₁..û_d, ẑ)`.
    pub fn mode_matrix(&self, grid: &Grid, idx: usize) -> Matrix {
        let d = grid.dim();
        let mut out = Matrix::zeros(d + 2);
        for col in 0..d + 2 {
            let mut s = NstState::zeros(grid);
            let e = Complex64::new(1.0, 0.0);
            match col {
                0 => s.a.coeffs_mut()[idx] = e,
                c if c <= d => s.u.component_coeffs_mut(c - 1)[idx] = e,
                _ => s.z.coeffs_mut()[idx] = e,
            }
            let r = self.apply(&s);
            out.set(0, col, r.a.coeffs()[idx]);
            for c in 0..d {
                out.set(c + 1, col, r.u.component_coeffs(c)[idx]);
            }
            out.set(d + 1, col, r.z.coeffs()[idx]);
        }
        out
    }
}

/// Generator of the linear system at one mode on `(â, û₁..û_d, ẑ)`.
pub fn mode_generator(grid: &Grid, c: &Coefficients, idx: usize) -> Matrix {
    let d = grid.dim();
    let xd = grid.xi_deriv(idx);
    let k2 = grid.xi_sq(idx);
    let e = c.mach;
    let mut g = Matrix::zeros(d + 2);
    for i in 0..d {
        // ∂t a = −i ξ·û/ε, ∂t z = −γ i ξ·û/ε
        g.set(0, i + 1, -I * xd[i] / e);
        g.set(d + 1, i + 1, -I * xd[i] * c.gamma / e);
        // ∂t û = −μ|ξ|²û − (μ+λ) ξ(ξ·û) − i ξ ẑ/ε
        g.set(i + 1, d + 1, -I * xd[i] / e);
        for j in 0..d {
            let mut v = -(c.mu + c.lambda) * xd[i] * xd[j];
            if i == j {
                v -= c.mu * k2;
            }
            g.set(i + 1, j + 1, Complex64::new(v, 0.0));
        }
    }
    g
}

fn norm3(v: [f64; 3]) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

/// `(I − Δt L)^{-1}` applied per mode.
fn implicit_linear_solve(s: &NstState, c: &Coefficients, dt: f64) -> NstState {
    let grid = s.grid();
    let d = grid.dim();
    let mut out = s.clone();
    for idx in 0..grid.total() {
        let k2 = grid.xi_sq(idx);
        let xd = grid.xi_deriv(idx);
        let kd = norm3(xd);
        let heat = 1.0 / (1.0 + dt * c.mu * k2);
        let u: Vec<Complex64> = (0..d).map(|k| s.u.component_coeffs(k)[idx]).collect();
        if kd == 0.0 {
            for k in 0..d {
                out.u.component_coeffs_mut(k)[idx] = u[k] * heat;
            }
            continue;
        }
        let alpha = c.mu * k2 + (c.mu + c.lambda) * kd * kd;
        let beta = kd / c.mach;
        let dir: Vec<f64> = (0..d).map(|k| xd[k] / kd).collect();
        let p: Complex64 = (0..d).map(|k| u[k] * dir[k]).sum();
        let m = I * p;
        let z = s.z.coeffs()[idx];
        let det = 1.0 + dt * alpha + dt * dt * c.gamma * beta * beta;
        let m_new = (m + z * (dt * beta)) / det;
        let z_new = (m * (-dt * c.gamma * beta) + z * (1.0 + dt * alpha)) / det;
        let p_new = -I * m_new;
        for k in 0..d {
            out.u.component_coeffs_mut(k)[idx] = (u[k] - p * dir[k]) * heat + p_new * dir[k];
        }
        out.z.coeffs_mut()[idx] = z_new;
        out.a.coeffs_mut()[idx] = s.a.coeffs()[idx] - m_new * (dt * beta);
    }
    out
}

/// Time-dependent source added to the nonlinear remainder.
pub type Forcing<'a> = dyn Fn(f64) -> Result<NstState> + 'a;

/// Largest `|u|` on the grid.
pub fn max_speed(u: &SpectralField) -> f64 {
    let total = u.grid().total();
    let phys = u.to_physical();
    (0..total)
        .map(|i| {
            libm::sqrt((0..u.ncomp()).map(|c| phys[c * total + i] * phys[c * total + i]).sum::<f64>())
        })
        .fold(0.0, f64::max)
}

/// Single-step driver holding cached propagators.
pub struct Stepper<'a> {
    coeffs: Coefficients,
    config: IntegratorConfig,
    forcing: Option<&'a Forcing<'a>>,
    cache: Vec<ModePropagator>,
}

impl<'a> Stepper<'a> {
    pub fn new(coeffs: Coefficients, config: IntegratorConfig) -> Result<Self> {
        config.validate()?;
        if !(coeffs.mach > 0.0) {
            return Err(Error::Config(format!("Mach number must be positive, got {}", coeffs.mach)));
        }
        Ok(Self { coeffs, config, forcing: None, cache: Vec::new() })
    }

    pub fn with_forcing(mut self, forcing: &'a Forcing<'a>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    fn propagator(&mut self, grid: &Grid, dt: f64) -> &ModePropagator {
        if let Some(pos) = self.cache.iter().position(|p| p.dt() == dt) {
            return &self.cache[pos];
        }
        self.cache.push(ModePropagator::new(grid, &self.coeffs, dt));
        self.cache.last().expect("just pushed")
    }

    fn remainder(&self, s: &NstState, t: f64) -> Result<NstState> {
        let mut r = if self.config.linear_only {
            NstState::zeros(s.grid())
        } else {
            tendency(s, &self.coeffs, Part::Nonlinear)?
        };
        if let Some(f) = self.forcing {
            r = r.axpy(1.0, &f(t)?)?;
        }
        Ok(r)
    }

    /// One step of size `dt` without CFL control.
    pub fn step(&mut self, s: &NstState, dt: f64) -> Result<NstState> {
        let t = s.time;
        let mut out = match self.config.scheme {
            Scheme::SplitStep => {
                let grid = s.grid().clone();
                let s1 = self.propagator(&grid, 0.5 * dt).apply(s);
                let k1 = self.remainder(&s1, t)?;
                let pred = s1.axpy(dt, &k1)?;
                let k2 = self.remainder(&pred, t + dt)?;
                let s2 = s1.axpy(0.5 * dt, &k1)?.axpy(0.5 * dt, &k2)?;
                let mut s3 = self.propagator(&grid, 0.5 * dt).apply(&s2);
                s3.time = t + dt;
                s3
            }
            Scheme::ImexEuler => {
                let k = self.remainder(s, t)?;
                let mut r = implicit_linear_solve(&s.axpy(dt, &k)?, &self.coeffs, dt);
                r.time = t + dt;
                r
            }
        };
        if self.config.dealias {
            out.dealias();
        }
        Ok(out)
    }

    /// Advance by `dt`, splitting into halved substeps while the CFL
    /// condition fails.
    pub fn advance(&mut self, s: &NstState, dt: f64) -> Result<(NstState, usize)> {
        let h = s.grid().spacing();
        let speed = max_speed(&s.u);
        let mut sub = 1usize;
        let mut dt_sub = dt;
        while speed * dt_sub > self.config.cfl * h {
            sub *= 2;
            dt_sub = dt / sub as f64;
            if dt_sub < self.config.dt_min {
                return Err(Error::StepTooSmall { dt: dt_sub, dt_min: self.config.dt_min });
            }
        }
        let mut cur = s.clone();
        for _ in 0..sub {
            cur = self.step(&cur, dt_sub)?;
        }
        Ok((cur, sub))
    }
}

/// One split step of size `dt` (convenience wrapper).
pub fn step(
    s: &NstState,
    dt: f64,
    coeffs: &Coefficients,
    config: &IntegratorConfig,
) -> Result<NstState> {
    Stepper::new(*coeffs, *config)?.step(s, dt)
}

/// Snapshots of a run.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<NstState>,
    /// Independently transported `ω`, when tracked.
    pub omega: Vec<SpectralField>,
    /// Executed steps including CFL substeps.
    pub steps: usize,
    /// Why the run stopped early; the last snapshot is the last valid state.
    pub failure: Option<Error>,
}

impl TimeSeries {
    pub fn last(&self) -> &NstState {
        self.states.last().expect("series holds the initial state")
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Integrate from `state0` to `config.t_end`, recording snapshots at the
/// configured cadence and calling `observer` on every accepted step.
pub fn integrate(
    state0: &NstState,
    coeffs: &Coefficients,
    config: &IntegratorConfig,
    forcing: Option<&Forcing<'_>>,
    observer: &mut dyn FnMut(&NstState),
) -> Result<TimeSeries> {
    let mut stepper = Stepper::new(*coeffs, *config)?;
    if let Some(f) = forcing {
        stepper = stepper.with_forcing(f);
    }
    let nsteps = config.steps();
    let mut series = TimeSeries {
        times: vec![state0.time],
        states: vec![state0.clone()],
        omega: Vec::new(),
        steps: 0,
        failure: None,
    };
    let mut w = if config.track_omega { Some(omega(state0, coeffs.gamma)?) } else { None };
    if let Some(w) = &w {
        series.omega.push(w.clone());
    }
    let mut cur = state0.clone();
    observer(&cur);
    for n in 1..=nsteps {
        let t_next = state0.time + n as f64 * config.dt;
        let advanced = stepper
            .advance(&cur, t_next - cur.time)
            .and_then(|(next, sub)| match &w {
                Some(w0) => {
                    let dt = next.time - cur.time;
                    let r0 = omega_rhs_of(w0, &cur.u, &cur.z, coeffs.gamma)?;
                    let pred = w0.axpy(dt, &r0)?;
                    let r1 = omega_rhs_of(&pred, &next.u, &next.z, coeffs.gamma)?;
                    let w1 = w0.axpy(0.5 * dt, &r0)?.axpy(0.5 * dt, &r1)?;
                    Ok((next, sub, Some(w1)))
                }
                None => Ok((next, sub, None)),
            });
        match advanced {
            Ok((next, sub, w1)) => {
                series.steps += sub;
                cur = next;
                cur.time = t_next;
                if w1.is_some() {
                    w = w1;
                }
                observer(&cur);
                if n % config.snapshot_every == 0 || n == nsteps {
                    series.times.push(cur.time);
                    series.states.push(cur.clone());
                    if let Some(w) = &w {
                        series.omega.push(w.clone());
                    }
                }
            }
            Err(e) => {
                if series.times.last() != Some(&cur.time) {
                    series.times.push(cur.time);
                    series.states.push(cur.clone());
                    if let Some(w) = &w {
                        series.omega.push(w.clone());
                    }
                }
                series.failure = Some(e);
                break;
            }
        }
    }
    Ok(series)
}
