//! Least-squares power-law fits in log-log coordinates.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Residual above which a fit is flagged as a poor power law.
pub const RESIDUAL_FLAG: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// Maximum relative deviation of the data from the fitted law.
    pub residual: f64,
}

impl PowerLawFit {
    pub fn flagged(&self) -> bool {
        self.residual > RESIDUAL_FLAG
    }

    pub fn predict(&self, x: f64) -> f64 {
        libm::exp(self.intercept + self.slope * libm::log(x))
    }
}

/// Fit `value ≈ C (1+t)^slope` by ordinary least squares on `log(1+t)`.
///
/// Needs at least 8 samples, `t ≥ 1` and positive values.
pub fn fit_power_law(times: &[f64], values: &[f64]) -> Result<PowerLawFit> {
    if times.len() != values.len() {
        return Err(Error::Shape(format!("{} times for {} values", times.len(), values.len())));
    }
    if times.len() < 8 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 8", times.len())));
    }
    if let Some(t) = times.iter().find(|&&t| !(t >= 1.0)) {
        return Err(Error::Data(format!("time {t} below 1")));
    }
    let shifted: Vec<f64> = times.iter().map(|t| 1.0 + t).collect();
    fit_loglog(&shifted, values)
}

/// Fit `y ≈ C x^slope` by least squares on `(log x, log y)`; needs two samples.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} abscissae for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 samples".into()));
    }
    if let Some((x, y)) = xs.iter().zip(ys).find(|(x, y)| !(**x > 0.0 && **y > 0.0)) {
        return Err(Error::Data(format!("nonpositive sample ({x}, {y})")));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| libm::log(*x)).collect();
    let ly: Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("abscissae are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| libm::fabs(libm::expm1(y - intercept - slope * x)))
        .fold(0.0, f64::max);
    Ok(PowerLawFit { slope, intercept, residual })
}
