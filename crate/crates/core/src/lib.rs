//! Coupled-resonator wireless power transfer simulation.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] computes self and mutual inductance of planar spiral coils
//!   from their dimensions, and the lateral offset at which two coils decouple.
//! * [`circuit`] assembles the N-coil phasor circuit and solves it for coil
//!   currents, losses and efficiency.
//! * [`analytic`] holds the closed-form channel expressions (two-coil,
//!   three-coil, multichannel) used to cross-check the solver.
//! * [`sweep`] builds the linear multi-channel array and sweeps the receiver.
//! * [`measurement`] reads and writes Touchstone two-port data and evaluates
//!   loaded efficiency from network parameters.

// negated comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod circuit;
pub mod geometry;
pub mod linalg;
pub mod measurement;
pub mod quadrature;
pub mod roots;
pub mod sweep;

mod error;

pub use error::{Error, Result};

/// Vacuum permeability (H/m).
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Complex scalar used throughout the phasor code.
pub type Complex = num_complex::Complex64;
