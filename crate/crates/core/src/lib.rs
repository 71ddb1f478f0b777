//! Numerical core for McKean–Vlasov interacting-particle dynamics and their
//! linearization around the invariant measure.
//!
//! The linearized process replaces the time-dependent law in the mean-field
//! drift by the equilibrium density `f_inf`, turning a nonlinear, nonlocal
//! diffusion into an ordinary Itô diffusion. This crate provides:
//!
//! - [`potentials`]: confining/interaction potentials and their convolutions,
//! - [`simulate`]: Euler–Maruyama integrators for the particle system and the
//!   linearized SDE, with counter-based noise streams,
//! - [`equilibrium`]: Kirkwood–Monroe fixed points, free energy, and the
//!   Bessel self-consistency equation of the cosine model on the torus,
//! - [`fokker_planck`]: a conservative finite-volume solver for the nonlinear
//!   and linearized Fokker–Planck equations,
//! - [`metrics`]: relative entropy, Fisher information, L¹/L²/TV, 1D W₂, KDE,
//! - [`bounds`]: closed-form decay constants and envelopes,
//! - [`inference`]: Girsanov log-likelihoods and (linearized) MLEs,
//! - [`homogenization`]: cell problem, effective diffusion and CLT diagnostics.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and parallel drivers live in the `mflin` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod diagnostics;
pub mod equilibrium;
mod error;
pub mod fokker_planck;
pub mod grid;
pub mod homogenization;
pub mod inference;
pub mod metrics;
pub mod potentials;
pub mod rng;
pub mod simulate;
pub mod special;
mod spline;
pub mod stats;

pub use diagnostics::Warning;
pub use error::{Error, Result};
pub use grid::{DensityGrid, Domain, GridSpec};
pub use potentials::{ModelSpec, PotentialKind};
