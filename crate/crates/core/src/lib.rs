//! Numerical engine for semiclassical gravity of a conformally coupled massless
//! scalar on conformally static spacetimes `g = e^(2 theta) g_bg`.
//!
//! The crate is organised by stage: background geometry, conformal curvature,
//! Hadamard states and their tails, the renormalised stress tensor, slice
//! constraints, and the extended hyperbolic evolution system.

pub mod background;
pub mod cli;
pub mod conformal;
pub mod config;
pub mod constraints;
pub mod error;
pub mod evolution;
pub mod numeric;
pub mod quantum_state;
pub mod stress;
pub mod tensor;

pub use error::{Error, Result};
