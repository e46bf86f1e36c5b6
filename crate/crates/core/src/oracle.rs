//! Independent reference integrators for constant-coefficient linear systems.
//!
//! These only use the generator matrix, never a closed-form exponential, so
//! they can cross-check [`crate::greens`] and the integrator's propagator.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_real(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n);
        Self { n, data: rows.iter().map(|v| Complex64::new(*v, 0.0)).collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.data[i * self.n + j] * x[j]).sum())
            .collect()
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Fixed-step classical RK4 for `dU/dt = A U` over `[0, t]`.
pub fn rk4_fixed(a: &Matrix, u0: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let h = t / steps as f64;
    let mut u = u0.to_vec();
    let axpy = |x: &[Complex64], s: f64, y: &[Complex64]| -> Vec<Complex64> {
        x.iter().zip(y).map(|(a, b)| a + b * s).collect()
    };
    for _ in 0..steps {
        let k1 = a.apply(&u);
        let k2 = a.apply(&axpy(&u, 0.5 * h, &k1));
        let k3 = a.apply(&axpy(&u, 0.5 * h, &k2));
        let k4 = a.apply(&axpy(&u, h, &k3));
        for i in 0..u.len() {
            u[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    u
}

/// RK4 with step halving until the Richardson error estimate drops below
/// `tol` (relative to `max(1, |U|)`); returns the extrapolated solution.
pub fn rk4_controlled(a: &Matrix, u0: &[Complex64], t: f64, tol: f64) -> Result<Vec<Complex64>> {
    if t == 0.0 {
        return Ok(u0.to_vec());
    }
    // start inside the stability region with a margin
    let mut steps = (libm::ceil(2.0 * t * a.norm_inf()) as usize).max(16);
    let mut coarse = rk4_fixed(a, u0, t, steps);
    let mut change = f64::INFINITY;
    for _ in 0..12 {
        steps *= 2;
        let fine = rk4_fixed(a, u0, t, steps);
        let scale = fine.iter().map(|v| v.norm()).fold(1.0, f64::max);
        change = fine.iter().zip(&coarse).map(|(f, c)| (f - c).norm()).fold(0.0, f64::max) / 15.0;
        if change <= tol * scale {
            return Ok(fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 15.0).collect());
        }
        coarse = fine;
    }
    Err(Error::Accuracy { change })
}

/// Columns of `exp(tA)` from [`rk4_controlled`].
pub fn exp_columns(a: &Matrix, t: f64, tol: f64) -> Result<Matrix> {
    let n = a.size();
    let mut out = Matrix::zeros(n);
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        let col = rk4_controlled(a, &e, t, tol)?;
        for i in 0..n {
            out.set(i, j, col[i]);
        }
    }
    Ok(out)
}
