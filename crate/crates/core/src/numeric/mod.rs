//! Numerical building blocks shared across the simulation modules.

pub mod linalg;
pub mod quad;
