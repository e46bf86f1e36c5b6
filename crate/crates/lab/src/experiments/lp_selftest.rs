use nst_lab_core::lp::{lp_norm_physical, BesovSpec, FilterBank, Integrability};
use nst_lab_core::{DerivativeKind, Grid, SpectralField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Report;
use crate::config::ExperimentConfig;
use crate::initial::random_field;
use crate::manifest::{Check, Comparison};
use crate::output::{num, Table};

pub const EXACT_TOL: f64 = 1e-12;
pub const BERNSTEIN_LOW: f64 = 0.75;
pub const BERNSTEIN_HIGH: f64 = 8.0 / 3.0;
pub const SCALING_TOL: f64 = 0.05;

fn rel(err: f64, scale: f64) -> f64 {
    if scale > 0.0 { err / scale } else { err }
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let d = grid.dim();
    let bank = FilterBank::covering(&grid, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Nyquist modes have no derivative symbol, so the data stays strictly below
    let kmax = (grid.points_per_axis() / 2 - 1) as f64;
    let f = random_field(&grid, 1, kmax, 1.0, &mut rng);
    let u = random_field(&grid, d, kmax, 1.0, &mut rng);
    let mut report = Report::default();

    let mut pou: f64 = 0.0;
    for idx in 1..grid.total() {
        let r = grid.xi_norm(idx);
        pou = pou.max((bank.blocks().map(|k| bank.weight(k, r)).sum::<f64>() - 1.0).abs());
    }
    report.checks.push(
        Check::new("partition_of_unity", pou, Comparison::Below, EXACT_TOL)
            .with_detail("max |Σ_k φ(2^{−k}|ξ|) − 1| over nonzero lattice modes"),
    );

    let blocks: Vec<(i32, SpectralField)> =
        bank.blocks().map(|k| Ok((k, bank.dyadic_block(&f, k)?))).collect::<anyhow::Result<_>>()?;
    let mut overlap: f64 = 0.0;
    for (k, bk) in &blocks {
        for (l, bl) in &blocks {
            if (k - l).abs() >= 2 {
                overlap = overlap.max(bk.inner(bl)?.abs());
            }
        }
    }
    report.checks.push(
        Check::new("almost_orthogonality", overlap, Comparison::AtMost, 0.0)
            .with_detail("max |⟨Δ̇_k f, Δ̇_l f⟩| for |k − l| ≥ 2"),
    );

    let fourier = bank.block_norms(&f, Integrability::Two);
    let mut parseval: f64 = 0.0;
    let mut bern = (f64::INFINITY, 0.0f64);
    let mut table = Table::new("lp_blocks", &["k", "l2_fourier", "l2_physical", "bernstein_ratio"]);
    for ((k, b), nf) in blocks.iter().zip(&fourier) {
        let phys = b.l2_norm_sq_physical().sqrt();
        parseval = parseval.max(rel((phys - nf).abs(), *nf));
        let n = b.l2_norm();
        let ratio = if n > 0.0 {
            let grad = b.derivative(DerivativeKind::Gradient)?.l2_norm();
            let r = grad / (2f64.powi(*k) * n);
            bern = (bern.0.min(r), bern.1.max(r));
            r
        } else {
            f64::NAN
        };
        table.push_nums(&[*k as f64, *nf, phys, ratio]);
    }
    report.checks.push(
        Check::new("parseval", parseval, Comparison::Below, EXACT_TOL)
            .with_detail("relative gap between Fourier and physical block L² norms"),
    );
    report.checks.push(
        Check::new("bernstein_lower", bern.0, Comparison::AtLeast, BERNSTEIN_LOW)
            .with_detail("min ‖∇Δ̇_k f‖/(2^k‖Δ̇_k f‖)"),
    );
    report.checks.push(
        Check::new("bernstein_upper", bern.1, Comparison::AtMost, BERNSTEIN_HIGH)
            .with_detail("max ‖∇Δ̇_k f‖/(2^k‖Δ̇_k f‖)"),
    );

    let scaling = scaling_law()?;
    report.checks.push(
        Check::new("scaling_law", scaling, Comparison::Within, SCALING_TOL).with_detail(
            "max |‖f(2·)‖_{Ḃ^s_{2,1}}/(2^{s−d/2}‖f‖_{Ḃ^s_{2,1}}) − 1| for a Gaussian, s ∈ {0.5, 1, 1.5}",
        ),
    );

    let (p, q) = u.leray_project()?;
    let un = u.l2_norm();
    report.checks.push(
        Check::new("leray_sum", rel(p.add(&q)?.sub(&u)?.l2_norm(), un), Comparison::Below, EXACT_TOL)
            .with_detail("‖ℙu + ℚu − u‖/‖u‖"),
    );
    let div = p.derivative(DerivativeKind::Divergence)?.l2_norm();
    let grad_scale = u.derivative(DerivativeKind::Gradient)?.l2_norm();
    report.checks.push(
        Check::new("leray_divergence_free", rel(div, grad_scale), Comparison::Below, EXACT_TOL)
            .with_detail("‖div ℙu‖/‖∇u‖"),
    );
    let hodge = u.hodge_decompose(false)?.reconstruct()?;
    report.checks.push(
        Check::new("hodge_round_trip", rel(hodge.sub(&u)?.l2_norm(), un), Comparison::Below, EXACT_TOL)
            .with_detail("‖−Λ^{−1}∇m + Λ^{−1}curl n − u‖/‖u‖"),
    );
    let phys = u.to_physical();
    let back = SpectralField::from_physical(&grid, d, &phys)?;
    report.checks.push(
        Check::new("fft_round_trip", rel(back.sub(&u)?.l2_norm(), un), Comparison::Below, EXACT_TOL)
            .with_detail(format!(
                "inverse then forward transform; sup |u| = {}",
                num(lp_norm_physical(&u, Integrability::Infinity))
            )),
    );

    report.tables.push(table);
    Ok(report)
}

/// Gaussian on a large box so that both it and its dilate are resolved and
/// negligible at the boundary.
fn scaling_law() -> anyhow::Result<f64> {
    let length = 16.0 * std::f64::consts::PI;
    let g = Grid::new(2, 128, length)?;
    let bank = FilterBank::covering(&g, 4);
    let c = length / 2.0;
    let gauss = |x: [f64; 3], s: f64| (-((s * (x[0] - c)).powi(2) + (s * (x[1] - c)).powi(2)) / 8.0).exp();
    let f = SpectralField::scalar_from_fn(&g, |x| gauss(x, 1.0));
    let h = SpectralField::scalar_from_fn(&g, |x| gauss(x, 2.0));
    Ok([0.5, 1.0, 1.5]
        .iter()
        .map(|&s| {
            let spec = BesovSpec::l2_sum(s);
            (bank.besov_norm(&h, &spec) / (2f64.powf(s - 1.0) * bank.besov_norm(&f, &spec)) - 1.0).abs()
        })
        .fold(0.0, f64::max))
}
