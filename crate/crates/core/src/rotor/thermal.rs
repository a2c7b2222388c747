use super::basis::{Basis, BasisMode};
use super::levels::prolate_energy;
use super::params::RotorParams;
use crate::error::{Error, Result};
use crate::units::thermal_energy;

/// Boltzmann weights over the basis, normalized to 1.
///
/// At T = 0 the weight is split evenly over the lowest level. Nuclear-spin
/// statistics are not included.
pub fn thermal_weights(basis: &Basis, params: &RotorParams) -> Result<Vec<f64>> {
    let energies: Vec<f64> = basis
        .states()
        .iter()
        .map(|s| {
            let k = match basis.mode() {
                BasisMode::LinearRotor => 0,
                BasisMode::SymmetricTop => s.k,
            };
            prolate_energy(s.j, k, params)
        })
        .collect::<Result<_>>()?;
    boltzmann(&energies, params.temperature_k)
}

/// Normalized Boltzmann weights for arbitrary energies in cm⁻¹.
pub fn boltzmann(energies: &[f64], temperature_k: f64) -> Result<Vec<f64>> {
    let kt = thermal_energy(temperature_k)?;
    if energies.is_empty() {
        return Err(Error::InvalidParameter("no energies".into()));
    }
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = if kt == 0.0 {
        energies.iter().map(|&e| if e == e_min { 1.0 } else { 0.0 }).collect()
    } else {
        energies.iter().map(|&e| (-(e - e_min) / kt).exp()).collect()
    };
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / z).collect())
}
