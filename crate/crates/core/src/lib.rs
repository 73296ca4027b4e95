//! Geometric phase propagator resummation for driven quantum systems.
//!
//! The crate computes resummed transition amplitudes, complex gamma factors
//! and resonance life-times for time-dependent Hamiltonians expressed in their
//! instantaneous eigenbasis. Two models ship with it: a driven harmonic
//! oscillator with an exact closed form, and a periodically driven delta
//! barrier checked against a Floquet sideband solver.
//!
//! Units are hbar = m = 1 throughout.

pub mod delta;
pub mod dho;
pub mod engine;
pub mod error;
pub mod floquet;
pub mod harness;
pub mod quadrature;
pub mod spectral;
pub mod two_level;

pub use error::{GppaError, Result};
pub use num_complex::Complex64 as C64;
