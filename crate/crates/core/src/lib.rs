//! Pseudo-spectral simulation of closed vortex filaments on the unit torus.
//!
//! A closed filament is a curve `x(xi, t)` with `xi` on the torus `R/Z`,
//! moving under the binormal self-induction velocity
//! `(x_xi × x_xixi) / |x_xi|^3` plus an ambient flow field `F(x, t)`.
//! The crate provides:
//!
//! * [`spectral`] — Fourier calculus on the torus (transforms, derivatives,
//!   Sobolev norms),
//! * [`filament`] — the curve representation, differential geometry and the
//!   Hasimoto transform,
//! * [`flows`] — builtin ambient flow fields and their Jacobians,
//! * [`solver`] — time integrators: a fourth-order dealiased scheme for the
//!   unregularized equation, and an exponential integrator with per-step
//!   Picard refinement for the fourth-order parabolic regularization,
//! * [`energy`] — the modified-energy diagnostics (tangential/normal
//!   splitting, gauge transform, energy growth monitoring),
//! * [`validation`] — exact oracles and desk-scale experiments,
//! * [`io`] / [`cli`] — run configuration, trajectory and diagnostics files,
//!   and the `vfsim` command-line driver.

pub mod cli;
pub mod energy;
pub mod error;
pub mod filament;
pub mod flows;
pub mod io;
pub mod solver;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
