//! Numerical laboratory for bosons in a cigar-shaped trap.
//!
//! Modules follow the physics pipeline: scaling points, the scaled pair
//! interaction, the transverse ground state, the effective 1D NLS, the
//! truncated N-body dynamics, counting projectors, and the auxiliary
//! functions used when integrating the interaction by parts.

pub mod auxiliary;
pub mod error;
pub mod harness;
pub mod manybody;
pub mod nls;
pub mod potentials;
pub mod projectors;
pub mod quadrature;
pub mod scaling;
pub mod transverse;

pub use error::{Error, Result};
