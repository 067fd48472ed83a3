//! Spectral solver for the incompressible Navier-Stokes system on the
//! three-torus with small initial data in the pseudo-measure space Φ(α).
//!
//! The solution is advanced one unit time interval at a time. On each
//! interval it is split into a heat-flow part, a part quadratic in the initial
//! data, and a remainder obtained from a contraction fixed-point solve; every
//! decay bound along the way is fitted and reported by [`certificates`].
//!
//! All spectral sums are Galerkin-truncated to a finite lattice and all time
//! integrals use a shared exponential quadrature, so the direct Picard solver
//! in [`reference`] reproduces the induction solver up to fixed-point
//! tolerances.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod error;
pub mod field;
pub mod induction;
pub mod lattice;
pub mod operators;
pub mod params;
pub mod reference;
pub mod vec3;

pub use error::{Error, Result};
pub use field::{fmc_norm, heat_multiply, phi_norm, SpectralField};
pub use lattice::{build_lattice, Lattice, LatticeSpec, TruncationRule, WaveVector};
pub use params::SolverParams;
pub use vec3::CVec3;
