//! Simulation and analysis of optical-centrifuge-driven molecular rotation
//! in a dissipative environment.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod observables;
pub mod rotor;
pub mod runner;
pub mod units;

pub use error::{Error, Result};
