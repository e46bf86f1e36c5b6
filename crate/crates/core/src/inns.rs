//! Incompressible inhomogeneous Navier–Stokes reference:
//! `∂t ϱ + div(ϱv) = 0`, `∂t v = ℙ(−v·∇v) + μ̄Δv`, `div v = 0`.
//!
//! The pressure never appears; the Leray projector removes it. The heat
//! factor is applied exactly and the transport terms by a Heun step.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{DerivativeKind, SpectralField};
use crate::integrator::{max_speed, IntegratorConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct InnsState {
    pub rho: SpectralField,
    pub v: SpectralField,
    pub time: f64,
}

impl InnsState {
    /// The velocity is projected onto divergence-free fields.
    pub fn new(rho: SpectralField, v: SpectralField, time: f64) -> Result<Self> {
        if rho.grid() != v.grid() || rho.ncomp() != 1 || v.ncomp() != v.grid().dim() {
            return Err(Error::Shape("need a scalar density and a vector velocity on one grid".into()));
        }
        let v = v.leray()?;
        Ok(Self { rho, v, time })
    }

    fn axpy(&self, s: f64, other: &InnsState) -> Result<InnsState> {
        Ok(InnsState {
            rho: self.rho.axpy(s, &other.rho)?,
            v: self.v.axpy(s, &other.v)?,
            time: self.time,
        })
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v.l2_norm_sq()
    }

    pub fn div_norm(&self) -> f64 {
        self.v.derivative(DerivativeKind::Divergence).map(|d| d.l2_norm()).unwrap_or(f64::NAN)
    }
}

fn transport(s: &InnsState) -> Result<InnsState> {
    let grid = s.rho.grid();
    let d = grid.dim();
    let total = grid.total();
    let rho = s.rho.to_physical();
    let v = s.v.to_physical();
    let grad_v = s.v.derivative(DerivativeKind::Gradient)?.to_physical();
    let mut flux = vec![0.0; d * total];
    let mut adv = vec![0.0; d * total];
    for i in 0..total {
        for c in 0..d {
            flux[c * total + i] = rho[i] * v[c * total + i];
            adv[c * total + i] =
                -(0..d).map(|j| v[j * total + i] * grad_v[(c * d + j) * total + i]).sum::<f64>();
        }
    }
    let mut flux = SpectralField::from_physical(grid, d, &flux)?;
    flux.dealias();
    let mut adv = SpectralField::from_physical(grid, d, &adv)?;
    adv.dealias();
    Ok(InnsState {
        rho: flux.derivative(DerivativeKind::Divergence)?.scaled(-1.0),
        v: adv.leray()?,
        time: s.time,
    })
}

/// Tendency `(−div(ϱv), ℙ(−v·∇v) + μ̄Δv)`.
pub fn rhs_inns(s: &InnsState, mu_bar: f64) -> Result<InnsState> {
    let mut r = transport(s)?;
    r.v = r.v.axpy(mu_bar, &s.v.derivative(DerivativeKind::Laplacian)?)?;
    Ok(r)
}

fn heat(v: &SpectralField, mu_bar: f64, dt: f64) -> SpectralField {
    let grid = v.grid();
    v.map_modes(|idx| Complex64::new(libm::exp(-mu_bar * grid.xi_sq(idx) * dt), 0.0))
}

#[derive(Debug, Clone)]
pub struct InnsSeries {
    pub times: Vec<f64>,
    pub states: Vec<InnsState>,
    pub failure: Option<Error>,
}

impl InnsSeries {
    pub fn last(&self) -> &InnsState {
        self.states.last().expect("series holds the initial state")
    }
}

fn step(s: &InnsState, mu_bar: f64, dt: f64, dealias: bool) -> Result<InnsState> {
    let half = |x: &InnsState| InnsState { rho: x.rho.clone(), v: heat(&x.v, mu_bar, 0.5 * dt), time: x.time };
    let s1 = half(s);
    let k1 = transport(&s1)?;
    let pred = s1.axpy(dt, &k1)?;
    let k2 = transport(&pred)?;
    let s2 = s1.axpy(0.5 * dt, &k1)?.axpy(0.5 * dt, &k2)?;
    let mut out = half(&s2);
    out.v = out.v.leray()?;
    if dealias {
        out.rho.dealias();
        out.v.dealias();
    }
    out.time = s.time + dt;
    Ok(out)
}

/// Integrate with the cadence, CFL control and end time of `config`.
pub fn integrate_inns(state0: &InnsState, mu_bar: f64, config: &IntegratorConfig) -> Result<InnsSeries> {
    config.validate()?;
    if !(mu_bar > 0.0) {
        return Err(Error::Config(format!("μ̄ must be positive, got {mu_bar}")));
    }
    let nsteps = config.steps();
    let mut series = InnsSeries { times: vec![state0.time], states: vec![state0.clone()], failure: None };
    let mut cur = state0.clone();
    let h = state0.rho.grid().spacing();
    for n in 1..=nsteps {
        let t_next = state0.time + n as f64 * config.dt;
        let dt = t_next - cur.time;
        let speed = max_speed(&cur.v);
        let mut sub = 1usize;
        while speed * dt / sub as f64 > config.cfl * h {
            sub *= 2;
        }
        let result = if dt / (sub as f64) < config.dt_min {
            Err(Error::StepTooSmall { dt: dt / sub as f64, dt_min: config.dt_min })
        } else {
            (0..sub).try_fold(cur.clone(), |s, _| step(&s, mu_bar, dt / sub as f64, config.dealias))
        };
        match result {
            Ok(mut next) => {
                next.time = t_next;
                cur = next;
                if n % config.snapshot_every == 0 || n == nsteps {
                    series.times.push(cur.time);
                    series.states.push(cur.clone());
                }
            }
            Err(e) => {
                if series.times.last() != Some(&cur.time) {
                    series.times.push(cur.time);
                    series.states.push(cur.clone());
                }
                series.failure = Some(e);
                break;
            }
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn zero_velocity_is_stationary() {
        let g = Grid::new(2, 16, 2.0 * core::f64::consts::PI).unwrap();
        let rho = SpectralField::scalar_from_fn(&g, |x| libm::sin(x[0]));
        let s = InnsState::new(rho, SpectralField::zeros(&g, 2), 0.0).unwrap();
        let r = rhs_inns(&s, 0.1).unwrap();
        assert!(r.rho.max_coeff() < 1e-15 && r.v.max_coeff() < 1e-15);
    }
}
