//! Fields on a periodic grid stored as Fourier coefficients, with exact
//! multiplier operators (derivatives, Leray projectors, Hodge decomposition).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::transform_nd;
use crate::grid::Grid;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Fourier-multiplier operators accepted by [`SpectralField::derivative`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeKind {
    Gradient,
    Divergence,
    /// `curl_{ij} = ∂_j u^i − ∂_i u^j`; a `d×d` matrix field in 3-D and the
    /// scalar `curl_{21} = ∂_1 u² − ∂_2 u¹` in 2-D.
    Curl,
    Laplacian,
    /// `Λ^s = (−Δ)^{s/2}`.
    LambdaPower(f64),
}

/// A scalar, vector or matrix field on a periodic grid.
///
/// Coefficients are stored component-major, each component in the grid's
/// mode order. Physical values are produced on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        Self {
            grid: grid.clone(),
            ncomp,
            coeffs: vec![ZERO; ncomp * grid.total()],
        }
    }

    /// Wrap raw coefficients (component-major).
    pub fn from_coeffs(grid: &Grid, ncomp: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != ncomp * grid.total() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                ncomp * grid.total(),
                coeffs.len()
            )));
        }
        Ok(Self { grid: grid.clone(), ncomp, coeffs })
    }

    /// Forward-transform real samples (component-major).
    pub fn from_physical(grid: &Grid, ncomp: usize, values: &[f64]) -> Result<Self> {
        let total = grid.total();
        if values.len() != ncomp * total {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                ncomp * total,
                values.len()
            )));
        }
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for chunk in coeffs.chunks_mut(total) {
            transform_nd(grid.plan(), grid.dim(), chunk, false);
        }
        let mut f = Self { grid: grid.clone(), ncomp, coeffs };
        f.enforce_hermitian();
        Ok(f)
    }

    /// Sample `f(x)` (returning `ncomp` values) at every grid point.
    pub fn from_fn<F>(grid: &Grid, ncomp: usize, f: F) -> Self
    where
        F: Fn([f64; 3], &mut [f64]),
    {
        let total = grid.total();
        let mut values = vec![0.0; ncomp * total];
        let mut buf = vec![0.0; ncomp];
        for idx in 0..total {
            f(grid.point(idx), &mut buf);
            for c in 0..ncomp {
                values[c * total + idx] = buf[c];
            }
        }
        Self::from_physical(grid, ncomp, &values).expect("sizes match by construction")
    }

    /// Scalar convenience wrapper around [`SpectralField::from_fn`].
    pub fn scalar_from_fn<F: Fn([f64; 3]) -> f64>(grid: &Grid, f: F) -> Self {
        Self::from_fn(grid, 1, |x, out| out[0] = f(x))
    }

    /// Constant scalar field.
    pub fn constant(grid: &Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid, 1);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component_coeffs(&self, c: usize) -> &[Complex64] {
        let t = self.grid.total();
        &self.coeffs[c * t..(c + 1) * t]
    }

    pub fn component_coeffs_mut(&mut self, c: usize) -> &mut [Complex64] {
        let t = self.grid.total();
        &mut self.coeffs[c * t..(c + 1) * t]
    }

    /// Extract one component as a scalar field.
    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            ncomp: 1,
            coeffs: self.component_coeffs(c).to_vec(),
        }
    }

    /// Stack scalar fields into one multi-component field.
    pub fn stack(parts: &[SpectralField]) -> Result<SpectralField> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("cannot stack zero fields".into()))?;
        let mut coeffs = Vec::with_capacity(parts.len() * first.grid.total());
        let mut ncomp = 0;
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::Shape("stacked fields live on different grids".into()));
            }
            coeffs.extend_from_slice(&p.coeffs);
            ncomp += p.ncomp;
        }
        Ok(SpectralField { grid: first.grid.clone(), ncomp, coeffs })
    }

    /// Inverse transform to real samples (component-major).
    pub fn to_physical(&self) -> Vec<f64> {
        let total = self.grid.total();
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut buf = vec![ZERO; total];
        for c in 0..self.ncomp {
            buf.copy_from_slice(self.component_coeffs(c));
            transform_nd(self.grid.plan(), self.grid.dim(), &mut buf, true);
            out.extend(buf.iter().map(|v| v.re));
        }
        out
    }

    /// Spatial mean of each component (the zero-mode coefficient).
    pub fn mean(&self, c: usize) -> f64 {
        self.component_coeffs(c)[0].re
    }

    /// Remove the zero mode of every component.
    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.clone();
        let t = self.grid.total();
        for c in 0..self.ncomp {
            out.coeffs[c * t] = ZERO;
        }
        out
    }

    /// Project onto real fields: `f̂(−ξ) = conj f̂(ξ)`, self-conjugate modes real.
    pub fn enforce_hermitian(&mut self) {
        let total = self.grid.total();
        for c in 0..self.ncomp {
            let comp = &mut self.coeffs[c * total..(c + 1) * total];
            for idx in 0..total {
                let neg = self.grid.negated(idx);
                if neg < idx {
                    continue;
                }
                if neg == idx {
                    comp[idx].im = 0.0;
                } else {
                    let avg = (comp[idx] + comp[neg].conj()) * 0.5;
                    comp[idx] = avg;
                    comp[neg] = avg.conj();
                }
            }
        }
    }

    /// Zero the modes removed by the 2/3 rule.
    pub fn dealias(&mut self) {
        let total = self.grid.total();
        for idx in 0..total {
            if !self.grid.dealias_keep(idx) {
                for c in 0..self.ncomp {
                    self.coeffs[c * total + idx] = ZERO;
                }
            }
        }
    }

    /// Apply a per-mode complex multiplier to every component.
    pub fn map_modes<F: Fn(usize) -> Complex64>(&self, f: F) -> SpectralField {
        let total = self.grid.total();
        let mut out = self.clone();
        for idx in 0..total {
            let w = f(idx);
            for c in 0..self.ncomp {
                out.coeffs[c * total + idx] *= w;
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|v| *v *= s);
        out
    }

    fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid || self.ncomp != other.ncomp {
            return Err(Error::Shape(format!(
                "field shapes differ ({} vs {} components)",
                self.ncomp, other.ncomp
            )));
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b * s;
        }
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// `‖f‖²_{L²}` from the Fourier side (all components).
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_norm_sq())
    }

    /// `‖f‖²_{L²}` by rectangle-rule quadrature of the physical samples.
    pub fn l2_norm_sq_physical(&self) -> f64 {
        self.grid.cell_volume() * self.to_physical().iter().map(|v| v * v).sum::<f64>()
    }

    /// Real `L²` inner product (Fourier side).
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        Ok(self.grid.volume() * s)
    }

    /// Largest coefficient magnitude, a max-norm on the Fourier side.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `i ξ_a`, zeroed when axis `a` sits on the Nyquist index.
    fn ik(&self, idx: usize, axis: usize) -> Complex64 {
        I * self.grid.xi_deriv(idx)[axis]
    }

    /// Partial derivative `∂_a` of every component.
    pub fn partial(&self, axis: usize) -> SpectralField {
        self.map_modes(|idx| self.ik(idx, axis))
    }

    /// Apply a Fourier-multiplier operator.
    pub fn derivative(&self, kind: DerivativeKind) -> Result<SpectralField> {
        let d = self.grid.dim();
        let total = self.grid.total();
        match kind {
            DerivativeKind::Gradient => {
                let mut out = SpectralField::zeros(&self.grid, self.ncomp * d);
                for c in 0..self.ncomp {
                    let src = self.component_coeffs(c);
                    for a in 0..d {
                        let dst = &mut out.coeffs[(c * d + a) * total..(c * d + a + 1) * total];
                        for idx in 0..total {
                            dst[idx] = src[idx] * self.ik(idx, a);
                        }
                    }
                }
                Ok(out)
            }
            DerivativeKind::Divergence => {
                self.require_vector("divergence")?;
                let mut out = SpectralField::zeros(&self.grid, 1);
                for a in 0..d {
                    let src = self.component_coeffs(a);
                    for idx in 0..total {
                        out.coeffs[idx] += src[idx] * self.ik(idx, a);
                    }
                }
                Ok(out)
            }
            DerivativeKind::Curl => {
                self.require_vector("curl")?;
                let entry = |i: usize, j: usize, idx: usize| {
                    self.component_coeffs(i)[idx] * self.ik(idx, j)
                        - self.component_coeffs(j)[idx] * self.ik(idx, i)
                };
                if d == 2 {
                    let coeffs = (0..total).map(|idx| entry(1, 0, idx)).collect();
                    Ok(SpectralField { grid: self.grid.clone(), ncomp: 1, coeffs })
                } else {
                    let mut out = SpectralField::zeros(&self.grid, d * d);
                    for i in 0..d {
                        for j in 0..d {
                            let dst = out.component_coeffs_mut(i * d + j);
                            for (idx, v) in dst.iter_mut().enumerate() {
                                *v = entry(i, j, idx);
                            }
                        }
                    }
                    Ok(out)
                }
            }
            DerivativeKind::Laplacian => {
                Ok(self.map_modes(|idx| Complex64::new(-self.grid.xi_sq(idx), 0.0)))
            }
            DerivativeKind::LambdaPower(s) => {
                if s < 0.0 {
                    let scale = self.max_coeff().max(f64::MIN_POSITIVE);
                    for c in 0..self.ncomp {
                        let m = self.component_coeffs(c)[0].norm();
                        if m > 1e-13 * scale {
                            return Err(Error::SingularMode(format!(
                                "Λ^{s} needs a vanishing zero mode; component {c} has mean {m:e}"
                            )));
                        }
                    }
                }
                Ok(self.map_modes(|idx| {
                    let k2 = self.grid.xi_sq(idx);
                    if k2 == 0.0 {
                        if s == 0.0 {
                            Complex64::new(1.0, 0.0)
                        } else {
                            ZERO
                        }
                    } else {
                        Complex64::new(libm::pow(k2, 0.5 * s), 0.0)
                    }
                }))
            }
        }
    }

    fn require_vector(&self, what: &str) -> Result<()> {
        if self.ncomp != self.grid.dim() {
            return Err(Error::Shape(format!(
                "{what} needs a {}-component vector field, got {} components",
                self.grid.dim(),
                self.ncomp
            )));
        }
        Ok(())
    }

    /// Leray split `u = ℙu + ℚu` with `ℚ = −∇(−Δ)^{-1}div`.
    ///
    /// The zero mode is assigned entirely to `ℙu`.
    pub fn leray_project(&self) -> Result<(SpectralField, SpectralField)> {
        self.require_vector("leray projection")?;
        let d = self.grid.dim();
        let total = self.grid.total();
        let mut q = SpectralField::zeros(&self.grid, d);
        for idx in 1..total {
            let xi = self.grid.xi(idx);
            let k2 = self.grid.xi_sq(idx);
            let dot: Complex64 = (0..d).map(|a| self.coeffs[a * total + idx] * xi[a]).sum();
            for a in 0..d {
                q.coeffs[a * total + idx] = dot * (xi[a] / k2);
            }
        }
        let p = self.sub(&q)?;
        Ok((p, q))
    }

    /// Divergence-free part `ℙu`.
    pub fn leray(&self) -> Result<SpectralField> {
        Ok(self.leray_project()?.0)
    }

    /// Hodge variables `m = Λ^{-1} div u`, `n = Λ^{-1} curl u`.
    ///
    /// A nonzero mean is an error unless `carry_mean` is set, in which case it
    /// is stored on the side and restored by [`HodgeParts::reconstruct`].
    pub fn hodge_decompose(&self, carry_mean: bool) -> Result<HodgeParts> {
        self.require_vector("hodge decomposition")?;
        let d = self.grid.dim();
        let mean: Vec<f64> = (0..d).map(|a| self.mean(a)).collect();
        let scale = self.max_coeff().max(f64::MIN_POSITIVE);
        if !carry_mean && mean.iter().any(|m| m.abs() > 1e-13 * scale) {
            return Err(Error::SingularMode(
                "hodge decomposition of a field with nonzero mean; enable mean carry".into(),
            ));
        }
        let fluct = self.without_mean();
        let inv = DerivativeKind::LambdaPower(-1.0);
        let m = fluct.derivative(DerivativeKind::Divergence)?.derivative(inv)?;
        let n = fluct.derivative(DerivativeKind::Curl)?.derivative(inv)?;
        Ok(HodgeParts { m, n, mean })
    }
}

/// Output of [`SpectralField::hodge_decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeParts {
    /// `Λ^{-1} div u`.
    pub m: SpectralField,
    /// `Λ^{-1} curl u` in the layout of [`DerivativeKind::Curl`].
    pub n: SpectralField,
    /// Mean velocity carried on the side.
    pub mean: Vec<f64>,
}

impl HodgeParts {
    /// Factor `c` in `‖u − ū‖² = ‖m‖² + c‖n‖²`: 1 for the 2-D scalar curl, 1/2 for
    /// the full antisymmetric matrix in 3-D (each entry appears twice).
    pub fn curl_norm_factor(&self) -> f64 {
        if self.m.grid().dim() == 2 {
            1.0
        } else {
            0.5
        }
    }

    /// `u = −Λ^{-1}∇m + Λ^{-1} curl n + ū`, where `(curl n)^i = −Σ_j ∂_j n_{ij}`
    /// so that `Δ = ∇div − curl curl`.
    pub fn reconstruct(&self) -> Result<SpectralField> {
        let grid = self.m.grid().clone();
        let d = grid.dim();
        let inv = DerivativeKind::LambdaPower(-1.0);
        let potential = self.m.derivative(DerivativeKind::Gradient)?.derivative(inv)?.scaled(-1.0);
        let curl_n = curl_of_matrix(&self.n)?;
        let mut u = potential.add(&curl_n.derivative(inv)?)?;
        let total = grid.total();
        for a in 0..d {
            u.coeffs[a * total] = Complex64::new(self.mean[a], 0.0);
        }
        Ok(u)
    }
}

/// `(curl n)^i = −Σ_j ∂_j n_{ij}` for a matrix field in the [`DerivativeKind::Curl`] layout.
pub fn curl_of_matrix(n: &SpectralField) -> Result<SpectralField> {
    let grid = n.grid();
    let d = grid.dim();
    if d == 2 {
        if n.ncomp() != 1 {
            return Err(Error::Shape("2-D curl field must be scalar".into()));
        }
        // n_{21} = n, n_{12} = −n
        let first = n.partial(1);
        let second = n.partial(0).scaled(-1.0);
        SpectralField::stack(&[first, second])
    } else {
        if n.ncomp() != d * d {
            return Err(Error::Shape("3-D curl field must have d*d components".into()));
        }
        let mut parts = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = SpectralField::zeros(grid, 1);
            for j in 0..d {
                acc = acc.axpy(-1.0, &n.component(i * d + j).partial(j))?;
            }
            parts.push(acc);
        }
        SpectralField::stack(&parts)
    }
}
