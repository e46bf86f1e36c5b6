use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use nst_lab::{run_and_write, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "nst-lab", version, about = "Spectral experiments for the compressible NST system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; keys not given keep the preset of the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "NST_LAB_THREADS", value_name = "N")]
    threads: Option<usize>,
    /// Seed for randomized initial data (overrides the configuration).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form Green matrix against the oracle, semigroup law, lower bound.
    GreensVerify,
    /// Whole-space linear decay rates by radial quadrature.
    DecayLinear,
    /// Nonlinear torus run: conservation, diagnostics, temporal orders.
    DecayNonlinear,
    /// Low-Mach sweep against the incompressible reference.
    MachSweep,
    /// Linear energy identity and the nonlinear energy functionals.
    EnergyCheck,
    /// Littlewood–Paley, projector and transform checks.
    LpSelftest,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Self::GreensVerify => ExperimentKind::GreensVerify,
            Self::DecayLinear => ExperimentKind::DecayLinear,
            Self::DecayNonlinear => ExperimentKind::DecayNonlinear,
            Self::MachSweep => ExperimentKind::MachSweep,
            Self::EnergyCheck => ExperimentKind::EnergyCheck,
            Self::LpSelftest => ExperimentKind::LpSelftest,
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(kind),
    };
    if cfg.kind != kind {
        bail!("configuration is for `{}` but the subcommand is `{kind}`", cfg.kind);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the thread pool")?;
    }

    let dir = PathBuf::from(&cfg.output_dir);
    let manifest = run_and_write(&cfg, &dir)?;
    for c in &manifest.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<32} {:>12e}  {}", c.name, c.measured, c.detail);
    }
    for w in &manifest.warnings {
        println!("warn {w}");
    }
    let failed = manifest.failed_checks().count();
    println!(
        "{kind}: {} of {} checks passed; outputs in {}",
        manifest.checks.len() - failed,
        manifest.checks.len(),
        dir.display()
    );
    Ok(failed == 0)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
