//! Experiment configuration.
//!
//! Files are TOML. A file names its `kind`; every other key is optional and
//! overrides the preset for that kind. Unknown keys are rejected.
//!
//! ```toml
//! kind = "mach-sweep"
//! seed = 7
//! output_dir = "out/mach-sweep"
//!
//! [grid]
//! dim = 2
//! n = 64
//! length = 6.283185307179586
//!
//! [fluid]
//! mu = 0.1
//! lambda = 0.0
//! gamma = 1.4
//! pressure_const = 1.0
//! vacuum_floor = 0.001
//!
//! [initial]
//! profile = "random"      # random | taylor-green | zero
//! amplitude = 0.1
//! kmax = 4.0              # random modes satisfy 0 < |j| <= kmax
//!
//! [time]
//! dt = 0.001
//! t_end = 1.0
//! snapshot_every = 100
//! cfl = 0.5
//! transient = 0.0         # start of the monotonicity window
//! halvings = 2            # dt-halving levels for order checks
//!
//! [mach]
//! eps = [0.25, 0.0625, 0.015625]
//! mu_bar = 0.1
//! lambda_bar = 0.0
//! reference_p = 4.0
//!
//! [decay]
//! dim = 3
//! sigma0 = -1.5
//! sigmas = [-1.0, 0.0, 1.0, 1.5]
//! t_min = 10.0
//! t_max = 10000.0
//! samples = 24
//! nodes_per_shell = 64
//! tolerance = 1e-4
//!
//! [greens]
//! nk = 30
//! nt = 30
//! t_min = 0.1
//! t_max = 10.0
//! bound_t_max = 100.0
//! bound_nt = 401
//! bound_nk = 200
//! ```

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context};
use nst_lab_core::greens::GreenParams;
use nst_lab_core::nst::FluidParams;
use nst_lab_core::Grid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GreensVerify,
    DecayLinear,
    DecayNonlinear,
    MachSweep,
    EnergyCheck,
    LpSelftest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::GreensVerify,
        Self::DecayLinear,
        Self::DecayNonlinear,
        Self::MachSweep,
        Self::EnergyCheck,
        Self::LpSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GreensVerify => "greens-verify",
            Self::DecayLinear => "decay-linear",
            Self::DecayNonlinear => "decay-nonlinear",
            Self::MachSweep => "mach-sweep",
            Self::EnergyCheck => "energy-check",
            Self::LpSelftest => "lp-selftest",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSpec {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub pressure_const: f64,
    pub vacuum_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Band-limited data with random phases and `1/(1+|j|²)` amplitudes.
    Random,
    /// Divergence-free `u = (sin x cos y, −cos x sin y)`, `a = z = 0`.
    TaylorGreen,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub profile: Profile,
    pub amplitude: f64,
    pub kmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub cfl: f64,
    pub transient: f64,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachSpec {
    pub eps: Vec<f64>,
    pub mu_bar: f64,
    pub lambda_bar: f64,
    /// Integrability index of the reference exponent `1/2 − 1/p`.
    pub reference_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub dim: usize,
    pub sigma0: f64,
    pub sigmas: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub nodes_per_shell: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensSpec {
    pub nk: usize,
    pub nt: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub bound_t_max: f64,
    pub bound_nt: usize,
    pub bound_nk: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(with = "wide_seed")]
    pub seed: u64,
    pub output_dir: String,
    pub grid: GridSpec,
    pub fluid: FluidSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    pub mach: MachSpec,
    pub decay: DecaySpec,
    pub greens: GreensSpec,
}

/// TOML integers are signed; seeds above `i64::MAX` are written as strings.
mod wide_seed {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*v) {
            Ok(i) => s.serialize_i64(i),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(|_| de::Error::custom(format!("seed `{t}` is not a u64"))),
        }
    }
}

impl ExperimentConfig {
    /// Default settings for one experiment kind.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            seed: 20240601,
            output_dir: format!("out/{kind}"),
            grid: GridSpec { dim: 2, n: 64, length: std::f64::consts::TAU },
            fluid: FluidSpec { mu: 0.1, lambda: 0.0, gamma: 1.4, pressure_const: 1.0, vacuum_floor: 1e-3 },
            initial: InitialSpec { profile: Profile::Random, amplitude: 1e-2, kmax: 4.0 },
            time: TimeSpec { dt: 0.01, t_end: 50.0, snapshot_every: 50, cfl: 0.5, transient: 5.0, halvings: 2 },
            mach: MachSpec { eps: vec![0.25, 0.0625, 0.015625], mu_bar: 0.1, lambda_bar: 0.0, reference_p: 4.0 },
            decay: DecaySpec {
                dim: 3,
                sigma0: -1.5,
                sigmas: vec![-1.0, 0.0, 1.0, 1.5],
                t_min: 10.0,
                t_max: 1e4,
                samples: 24,
                nodes_per_shell: 64,
                tolerance: 1e-4,
            },
            greens: GreensSpec {
                nk: 30,
                nt: 30,
                t_min: 0.1,
                t_max: 10.0,
                bound_t_max: 100.0,
                bound_nt: 401,
                bound_nk: 200,
            },
        };
        match kind {
            ExperimentKind::GreensVerify | ExperimentKind::DecayLinear => {
                cfg.fluid = FluidSpec { mu: 1.0, lambda: 0.0, gamma: 1.0, ..cfg.fluid };
            }
            ExperimentKind::MachSweep => {
                cfg.initial.amplitude = 0.1;
                cfg.time = TimeSpec { dt: 1e-3, t_end: 1.0, snapshot_every: 100, transient: 0.0, ..cfg.time };
            }
            ExperimentKind::EnergyCheck => {
                cfg.grid.n = 32;
                cfg.time = TimeSpec { dt: 0.01, t_end: 10.0, snapshot_every: 10, transient: 0.0, ..cfg.time };
            }
            ExperimentKind::LpSelftest => {
                cfg.grid.n = 32;
            }
            ExperimentKind::DecayNonlinear => {}
        }
        cfg
    }

    /// Parse TOML text; keys not given keep the preset of the named kind.
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let file: toml::Table = toml::from_str(text).context("malformed configuration")?;
        let kind: ExperimentKind = match file.get("kind") {
            Some(v) => v.clone().try_into().context("invalid `kind`")?,
            None => bail!("configuration must name its `kind`"),
        };
        let mut merged = toml::Table::try_from(Self::preset(kind))?;
        overlay(&mut merged, file);
        let cfg: Self = merged.try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.grid.dim, self.grid.n, self.grid.length)?)
    }

    /// Unscaled fluid parameters (`ε = 1`).
    pub fn fluid_params(&self) -> anyhow::Result<FluidParams> {
        let f = &self.fluid;
        Ok(FluidParams::new(f.mu, f.lambda, f.gamma, f.pressure_const)?.with_vacuum_floor(f.vacuum_floor)?)
    }

    pub fn green_params(&self) -> anyhow::Result<GreenParams> {
        Ok(GreenParams::new(self.fluid.mu, self.fluid.lambda, self.fluid.gamma)?)
    }

    /// Check every range the invoked experiment depends on.
    pub fn validate(&self) -> anyhow::Result<()> {
        use ExperimentKind::*;
        if self.output_dir.is_empty() {
            bail!("output_dir must not be empty");
        }
        let i = &self.initial;
        if !(i.amplitude >= 0.0 && i.amplitude.is_finite()) || !(i.kmax > 0.0) {
            bail!("initial amplitude must be nonnegative and kmax positive");
        }
        let t = &self.time;
        if !(t.dt > 0.0) || !(t.t_end >= t.dt) || t.snapshot_every == 0 || !(t.cfl > 0.0) {
            bail!("time window needs dt > 0, t_end >= dt, snapshot_every >= 1, cfl > 0");
        }
        if !(t.transient >= 0.0 && t.transient < t.t_end) {
            bail!("transient must lie in [0, t_end)");
        }
        match self.kind {
            GreensVerify => {
                self.green_params()?;
                let g = &self.greens;
                if g.nk < 2 || g.nt < 2 || g.bound_nk == 0 || g.bound_nt < 2 {
                    bail!("greens grids need at least two points per axis");
                }
                if !(g.t_min > 0.0 && g.t_max > g.t_min && g.bound_t_max > 0.0) {
                    bail!("greens time ranges must be positive and increasing");
                }
            }
            DecayLinear => {
                self.green_params()?;
                let d = &self.decay;
                nst_lab_core::greens::frak_b_profile(d.sigma0, d.dim)?;
                let half = d.dim as f64 / 2.0;
                for &s in &d.sigmas {
                    if !(s > d.sigma0 && s <= half) {
                        bail!("σ = {s} must lie in (σ₀, d/2] = ({}, {half}]", d.sigma0);
                    }
                }
                if d.sigmas.is_empty() {
                    bail!("σ list is empty");
                }
                if !(d.t_min >= 1.0 && d.t_max > d.t_min) || d.samples < 8 {
                    bail!("decay window needs 1 <= t_min < t_max and at least 8 samples");
                }
                if d.nodes_per_shell < 4 || !(d.tolerance > 0.0) {
                    bail!("quadrature needs at least 4 nodes per shell and a positive tolerance");
                }
            }
            DecayNonlinear | EnergyCheck | LpSelftest => {
                self.grid()?;
                self.fluid_params()?;
            }
            MachSweep => {
                self.grid()?;
                let p = self.fluid_params()?;
                let m = &self.mach;
                if m.eps.is_empty() {
                    bail!("ε list is empty");
                }
                for &e in &m.eps {
                    p.with_mach(e, m.mu_bar, m.lambda_bar)?;
                }
                if !(m.reference_p > 2.0) {
                    bail!("reference p must exceed 2");
                }
            }
        }
        Ok(())
    }
}

fn overlay(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => overlay(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
