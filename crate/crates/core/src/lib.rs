//! Spectral numerics for the compressible Navier–Stokes–Transport (NST) system.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`grid`], [`fft`], [`field`]: periodic grids, radix-2 transforms, Fourier
//!   multipliers, Leray projectors and the Hodge decomposition.
//! * [`lp`]: a discrete Littlewood–Paley filter bank with homogeneous Besov and
//!   Chemin–Lerner norms.
//! * [`nst`]: the NST state, its unscaled and Mach-scaled right-hand sides, the
//!   transported mode `ω = γa − z` and the energy functionals.
//! * [`integrator`]: Strang splitting of the exact Fourier-space linear flow with
//!   an explicit Heun step for the nonlinear remainder.
//! * [`greens`]: closed-form Green matrix of the linearized acoustic block, the
//!   low-frequency lower bound and whole-space Besov decay curves.
//! * [`inns`]: the incompressible inhomogeneous Navier–Stokes reference solver.
//! * [`oracle`]: independent RK4 integrators used to cross-check closed forms.
//!
//! Transform convention: forward transforms are normalized by `1/N^d`, so the
//! stored coefficients are Fourier-series coefficients and
//! `‖f‖²_{L²} = L^d Σ_ξ |f̂(ξ)|²`. Modes use the standard FFT ordering; index
//! `j ∈ [0, N)` maps to the integer wavenumber `j` for `j < N/2` and `j − N`
//! otherwise, so the lattice is `[−N/2, N/2)` per axis.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod fft;
pub mod field;
pub mod fit;
pub mod greens;
pub mod grid;
pub mod inns;
pub mod integrator;
pub mod lp;
pub mod nst;
pub mod oracle;

pub use error::{Error, Result};
pub use field::{DerivativeKind, HodgeParts, SpectralField};
pub use grid::Grid;
pub use num_complex::Complex64;

/// Description of the transform normalization, recorded in run manifests.
pub const TRANSFORM_NORMALIZATION: &str =
    "forward 1/N^d, inverse unnormalized; modes in FFT order, index j -> j (j < N/2) else j - N; row-major, axis 0 slowest";

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
