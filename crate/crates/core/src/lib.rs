//! Quantum-optical state of the driving laser and harmonic modes after
//! high-harmonic generation in initially excited atoms: single-mode and
//! two-mode squeezing, entanglement, and heralded non-classical states.
//!
//! The crate is organized along the physical pipeline:
//!
//! * [`pulse`] — classical driver, harmonic mode grid, couplings;
//! * [`dipole`] — time-dependent dipole matrix elements (SFA or file);
//! * [`quadgen`] — displacement amplitudes and the quadratic photonic
//!   generator integrated from the dipole cross-element;
//! * [`fockspace`] — truncated-Fock evolution, heralding, Wigner functions;
//! * [`gaussian`] — covariance matrices, symplectic propagation and
//!   logarithmic negativity;
//! * [`analysis`] — figure-level pipelines and backend cross-checks;
//! * [`config`] — run configuration shared with the command-line driver.

pub mod analysis;
pub mod config;
pub mod dipole;
pub mod error;
pub mod fockspace;
pub mod gaussian;
pub mod numeric;
pub mod pulse;
pub mod quadgen;
pub mod report;

pub use config::RunConfig;
pub use error::{CoreError, Result};
