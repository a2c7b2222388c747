use crate::error::{Error, Result};
use crate::field::{delta_alpha_for_depth, DEFAULT_PEAK_INTENSITY};

/// Ratio between the gas-phase and in-droplet rotational constants.
pub const DROPLET_RENORMALIZATION: f64 = 1.9;

/// Nanodroplet temperature, K.
pub const DROPLET_TEMPERATURE_K: f64 = 0.4;

/// Calibration target for the shipped polarizability anisotropy: the peak
/// coupling depth at [`DEFAULT_PEAK_INTENSITY`] is this multiple of the
/// in-droplet B_yz. Not a molecular datum.
pub const DEFAULT_DEPTH_OVER_BYZ: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Environment {
    Gas,
    Droplet,
}

impl Environment {
    pub fn name(self) -> &'static str {
        match self {
            Environment::Gas => "gas",
            Environment::Droplet => "droplet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gas" => Ok(Self::Gas),
            "droplet" => Ok(Self::Droplet),
            other => Err(Error::InvalidParameter(format!("unknown environment `{other}`"))),
        }
    }
}

/// Rotational constants of a near-prolate top, in cm⁻¹, plus the
/// quantities needed to build its ensemble and its coupling to the field.
///
/// `b_x` belongs to the most polarizable axis (the a axis of the prolate
/// labeling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorParams {
    pub b_x: f64,
    pub b_y: f64,
    pub b_z: f64,
    /// Centrifugal distortion, cm⁻¹.
    pub d: f64,
    /// Polarizability anisotropy, atomic units.
    pub delta_alpha: f64,
    /// Ensemble temperature, K.
    pub temperature_k: f64,
    pub environment: Environment,
}

impl RotorParams {
    pub fn new(
        b_x: f64,
        b_y: f64,
        b_z: f64,
        d: f64,
        delta_alpha: f64,
        temperature_k: f64,
        environment: Environment,
    ) -> Result<Self> {
        let p = Self { b_x, b_y, b_z, d, delta_alpha, temperature_k, environment };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.b_x, self.b_y, self.b_z, self.d, self.delta_alpha, self.temperature_k];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("rotor constants must be finite and non-negative: {self:?}")));
        }
        if !(self.b_x >= self.b_y && self.b_y >= self.b_z) {
            return Err(Error::InvalidParameter(format!(
                "expected B_x >= B_y >= B_z, got {} {} {}",
                self.b_x, self.b_y, self.b_z
            )));
        }
        Ok(())
    }

    /// (NO)₂ with the gas-phase constants.
    pub fn no_dimer_gas() -> Self {
        Self {
            b_x: 0.86,
            b_y: 0.19,
            b_z: 0.15,
            d: 1e-6,
            delta_alpha: default_delta_alpha(),
            temperature_k: DROPLET_TEMPERATURE_K,
            environment: Environment::Gas,
        }
    }

    /// (NO)₂ inside a helium nanodroplet: B_y = B_z = 0.092 cm⁻¹ and B_x
    /// scaled down by the same renormalization factor.
    pub fn no_dimer_droplet() -> Self {
        let gas = Self::no_dimer_gas();
        Self {
            b_x: gas.b_x / DROPLET_RENORMALIZATION,
            b_y: 0.092,
            b_z: 0.092,
            environment: Environment::Droplet,
            ..gas
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "no-dimer-gas" => Ok(Self::no_dimer_gas()),
            "no-dimer-droplet" => Ok(Self::no_dimer_droplet()),
            other => Err(Error::InvalidParameter(format!("unknown molecule preset `{other}`"))),
        }
    }

    /// Effective constant of the perpendicular axes, `(B_y + B_z) / 2`.
    pub fn b_yz(&self) -> f64 {
        0.5 * (self.b_y + self.b_z)
    }

    pub fn with_d(self, d: f64) -> Self {
        Self { d, ..self }
    }

    pub fn with_temperature(self, temperature_k: f64) -> Self {
        Self { temperature_k, ..self }
    }
}

/// Anisotropy placing the default peak depth at 50 × B_yz(droplet).
pub fn default_delta_alpha() -> f64 {
    delta_alpha_for_depth(DEFAULT_DEPTH_OVER_BYZ * 0.092, DEFAULT_PEAK_INTENSITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::coupling_depth;

    #[test]
    fn presets() {
        let gas = RotorParams::no_dimer_gas();
        assert!((gas.b_yz() - 0.17).abs() < 1e-15);
        let drop = RotorParams::no_dimer_droplet();
        assert_eq!(drop.b_yz(), 0.092);
        assert!((drop.b_x - 0.86 / 1.9).abs() < 1e-15);
        assert_eq!(drop.d, 1e-6);
        drop.validate().unwrap();
        gas.validate().unwrap();
        let u0 = coupling_depth(DEFAULT_PEAK_INTENSITY, drop.delta_alpha);
        assert!((u0 - 4.6).abs() < 1e-12);
        assert!((u0 / drop.b_yz() - 50.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_ordering_and_negatives() {
        assert!(RotorParams::new(0.1, 0.2, 0.05, 0.0, 1.0, 0.4, Environment::Gas).is_err());
        assert!(RotorParams::new(0.3, 0.2, -0.1, 0.0, 1.0, 0.4, Environment::Gas).is_err());
        assert!(RotorParams::new(0.3, 0.2, 0.1, 0.0, 1.0, -0.4, Environment::Gas).is_err());
        assert!(RotorParams::preset("co2").is_err());
    }
}
