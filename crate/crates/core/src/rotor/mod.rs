//! Rigid-rotor model: constants, basis, energies, angle operators and the
//! thermal ensemble.

mod basis;
mod levels;
mod operators;
mod params;
pub mod sphere;
mod thermal;
pub mod wigner;

pub use basis::{Basis, BasisMode, BasisState};
pub(crate) use levels::linear_energy;
pub use levels::{asymmetric_levels, extract_byz, extract_byz_with_distortion, prolate_energy, resonance_frequency};
pub use operators::{angle_element, angle_operator, jy_operator, quadrature_oracle, AngleKind};
pub use params::{
    default_delta_alpha, Environment, RotorParams, DEFAULT_DEPTH_OVER_BYZ, DROPLET_RENORMALIZATION,
    DROPLET_TEMPERATURE_K,
};
pub use thermal::{boltzmann, thermal_weights};
