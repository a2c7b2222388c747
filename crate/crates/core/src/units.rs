//! Physical constants and unit conversions.
//!
//! Energies are carried in wavenumbers (cm⁻¹), times in picoseconds and
//! frequencies in GHz. Because `E / h = c · E` when `E` is in cm⁻¹, a level
//! spacing in cm⁻¹ becomes a frequency in GHz after one multiplication by
//! [`C_GHZ_PER_WAVENUMBER`].

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// 1 cm⁻¹ expressed in GHz (speed of light, exact by definition).
pub const C_GHZ_PER_WAVENUMBER: f64 = 29.979_245_8;

/// Boltzmann constant in cm⁻¹/K.
pub const KB_WAVENUMBER_PER_K: f64 = 0.695_034_800;

/// Intensity corresponding to a unit field amplitude in atomic units, W/cm².
pub const ATOMIC_UNIT_INTENSITY_W_CM2: f64 = 3.509_445_06e16;

/// One hartree in cm⁻¹.
pub const HARTREE_WAVENUMBER: f64 = 219_474.631_363;

/// Angular frequency, rad/ps, of a 1 cm⁻¹ energy: `2π · c · 1e-3`.
pub const RAD_PER_PS_PER_WAVENUMBER: f64 = TAU * C_GHZ_PER_WAVENUMBER * 1e-3;

/// Read-only bundle of the constants above, for callers that want to
/// echo them into a manifest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c_ghz_per_wavenumber: f64,
    pub kb_wavenumber_per_k: f64,
}

impl PhysicalConstants {
    pub const fn new() -> Self {
        Self { c_ghz_per_wavenumber: C_GHZ_PER_WAVENUMBER, kb_wavenumber_per_k: KB_WAVENUMBER_PER_K }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::new()
    }
}

pub fn wavenumber_to_ghz(e: f64) -> f64 {
    e * C_GHZ_PER_WAVENUMBER
}

pub fn ghz_to_wavenumber(f: f64) -> f64 {
    f / C_GHZ_PER_WAVENUMBER
}

/// Angular frequency in rad/ps for an energy in cm⁻¹.
pub fn wavenumber_to_rad_per_ps(e: f64) -> f64 {
    e * RAD_PER_PS_PER_WAVENUMBER
}

/// Angular frequency in rad/ps for a frequency in GHz.
pub fn ghz_to_rad_per_ps(f: f64) -> f64 {
    TAU * f * 1e-3
}

/// `kB · T` in cm⁻¹.
pub fn thermal_energy(temperature_k: f64) -> Result<f64> {
    if !(temperature_k >= 0.0) {
        return Err(Error::InvalidParameter(format!("temperature must be non-negative, got {temperature_k}")));
    }
    Ok(KB_WAVENUMBER_PER_K * temperature_k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_conversion_examples() {
        assert_eq!(wavenumber_to_ghz(0.0), 0.0);
        assert!((wavenumber_to_ghz(0.17) - 5.096_471_786).abs() < 1e-9);
        assert!((wavenumber_to_ghz(0.86) - 25.782_151_388).abs() < 1e-9);
    }

    #[test]
    fn thermal_energy_examples() {
        assert_eq!(thermal_energy(0.0).unwrap(), 0.0);
        assert!((thermal_energy(0.4).unwrap() - 0.278_013_92).abs() < 1e-8);
        assert!((thermal_energy(1.0).unwrap() - 0.695_034_8).abs() < 1e-9);
        assert!(thermal_energy(-1.0).is_err());
        assert!(thermal_energy(f64::NAN).is_err());
    }

    #[test]
    fn kb_within_tolerance() {
        assert!((PhysicalConstants::new().kb_wavenumber_per_k - 0.695_034_800).abs() <= 1e-8);
        assert_eq!(PhysicalConstants::default().c_ghz_per_wavenumber, 29.979_245_8);
    }

    #[test]
    fn angular_frequency_matches_two_pi_f() {
        let e = 0.552;
        let direct = ghz_to_rad_per_ps(wavenumber_to_ghz(e));
        assert!((wavenumber_to_rad_per_ps(e) - direct).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn ghz_round_trip(x in -1.0e6f64..1.0e6) {
            let back = ghz_to_wavenumber(wavenumber_to_ghz(x));
            proptest::prop_assert!((back - x).abs() <= 1e-14 * x.abs().max(f64::MIN_POSITIVE));
        }
    }
}
