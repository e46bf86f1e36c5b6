use nst_lab_core::fit::fit_power_law;
use nst_lab_core::greens::{decay_norm_curve, frak_b_profile, RadialQuadrature};
use rayon::prelude::*;

use super::{logspace, Report};
use crate::config::ExperimentConfig;
use crate::manifest::{Check, Comparison};
use crate::output::{num, Table};

pub const SLOPE_TOL: f64 = 0.05;
pub const BAND_LIMIT: f64 = 10.0;

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let d = &cfg.decay;
    let p = cfg.green_params()?;
    let profile = frak_b_profile(d.sigma0, d.dim)?;
    let times = logspace(d.t_min, d.t_max, d.samples);
    let quad = RadialQuadrature { nodes_per_shell: d.nodes_per_shell, tolerance: d.tolerance, ..Default::default() };

    let curves: Vec<anyhow::Result<Vec<f64>>> = d
        .sigmas
        .par_iter()
        .map(|&s| Ok(decay_norm_curve(&profile, &p, s, &times, &quad)?))
        .collect();

    let mut report = Report::default();
    for (&sigma, curve) in d.sigmas.iter().zip(curves) {
        let curve = curve?;
        let fit = fit_power_law(&times, &curve)?;
        let expect = -(sigma - d.sigma0) / 2.0;
        report.checks.push(
            Check::new(&format!("slope_sigma_{sigma}"), fit.slope - expect, Comparison::Within, SLOPE_TOL)
                .with_detail(format!(
                    "fitted slope {} vs −(σ−σ₀)/2 = {} over t ∈ [{}, {}]",
                    num(fit.slope),
                    num(expect),
                    num(d.t_min),
                    num(d.t_max)
                )),
        );
        let scaled: Vec<f64> =
            times.iter().zip(&curve).map(|(t, v)| v * (1.0 + t).powf((sigma - d.sigma0) / 2.0)).collect();
        let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
        let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
        report.checks.push(
            Check::new(&format!("band_sigma_{sigma}"), hi / lo, Comparison::Below, BAND_LIMIT)
                .with_detail("C/c for c(1+t)^{−(σ−σ₀)/2} ≤ norm ≤ C(1+t)^{−(σ−σ₀)/2}"),
        );
        if fit.flagged() {
            report.warnings.push(format!(
                "σ = {sigma}: fit residual {} exceeds the flag level; the curve is still approaching its power law",
                num(fit.residual)
            ));
        }
        let mut table = Table::new(format!("decay_sigma_{sigma}"), &["t", "norm"]);
        for (t, v) in times.iter().zip(&curve) {
            table.push_nums(&[*t, *v]);
        }
        report.tables.push(table);
    }
    Ok(report)
}
