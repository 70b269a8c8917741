//! Pseudo-spectral laboratory core for incompressible flow on a periodic box.
//!
//! The crate provides the field algebra (grids, transforms, projections,
//! propagators), measurement instruments (Lebesgue and weak-Lebesgue norms,
//! rate fits, inequality probes), a threshold splitting of initial data into
//! bounded and square-integrable parts, and the time-evolution machinery
//! (heat flow, a dealiased Navier-Stokes integrator, Duhamel integrals and
//! their iterates, energy ledgers).
//!
//! All operations treat fields as immutable values: every operator returns a
//! freshly allocated field and never mutates its input.

pub mod analysis;
pub mod calderon;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod grid;
pub mod spectral;

pub use error::CoreError;
pub use field::{Representation, ScalarField, TensorField, VectorField};
pub use grid::Grid3;

/// Complex scalar used throughout the spectral representation.
pub type C64 = num_complex::Complex<f64>;

/// Crate version, re-exported so downstream reports can cite it.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
