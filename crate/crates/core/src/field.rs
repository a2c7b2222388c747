//! Centrifuge and reference-pulse waveforms.
//!
//! A waveform is an intensity envelope plus a polarization-angle law φ(t)
//! in the XZ plane. Only the cycle-averaged quantities enter the rotor
//! dynamics: the normalized envelope and the polarization direction
//! ε̂(t) = (cos φ, 0, sin φ). The optical carrier is never represented.

use std::f64::consts::{LN_2, PI, TAU};

use crate::error::{Error, Result};
use crate::units::{ATOMIC_UNIT_INTENSITY_W_CM2, HARTREE_WAVENUMBER};

/// Default envelope FWHM, ps.
pub const DEFAULT_FWHM_PS: f64 = 200.0;
/// Default Gaussian truncation, in units of the FWHM on each side of the peak.
pub const DEFAULT_TRUNCATION_FWHM: f64 = 2.5;
/// Default peak intensity, W/cm².
pub const DEFAULT_PEAK_INTENSITY: f64 = 2.0e12;
/// Default end-to-end frequency spread of a drifting centrifuge, GHz.
pub const DEFAULT_DRIFT_SPREAD_GHZ: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeShape {
    Gaussian,
    /// Flat top with cos² ramps; half-maximum points sit at ±fwhm/2.
    Cos2FlatTop,
}

impl EnvelopeShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "cos2-flat-top" => Ok(Self::Cos2FlatTop),
            other => Err(Error::InvalidParameter(format!("unknown envelope shape `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Cos2FlatTop => "cos2-flat-top",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSpec {
    pub shape: EnvelopeShape,
    /// W/cm².
    pub peak_intensity: f64,
    /// ps.
    pub fwhm: f64,
    /// Time of the envelope peak, ps.
    pub center: f64,
    /// Gaussian: half-width of the support in FWHM units.
    /// Cos² flat top: ramp length in FWHM units.
    pub truncation: f64,
}

impl EnvelopeSpec {
    pub fn gaussian(peak_intensity: f64, fwhm: f64) -> Result<Self> {
        Self::new(EnvelopeShape::Gaussian, peak_intensity, fwhm, 0.0, DEFAULT_TRUNCATION_FWHM)
    }

    pub fn new(shape: EnvelopeShape, peak_intensity: f64, fwhm: f64, center: f64, truncation: f64) -> Result<Self> {
        if !(peak_intensity >= 0.0) || !peak_intensity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "peak intensity must be finite and >= 0, got {peak_intensity}"
            )));
        }
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::InvalidParameter(format!("fwhm must be > 0, got {fwhm}")));
        }
        if !(truncation > 0.0) || !truncation.is_finite() {
            return Err(Error::InvalidParameter(format!("envelope truncation must be > 0, got {truncation}")));
        }
        if shape == EnvelopeShape::Cos2FlatTop && truncation > 1.0 {
            return Err(Error::InvalidParameter("cos2 ramp cannot exceed one FWHM".to_string()));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter("envelope center must be finite".into()));
        }
        Ok(Self { shape, peak_intensity, fwhm, center, truncation })
    }

    /// Half-width of the support around `center`, ps.
    pub fn half_window(&self) -> f64 {
        match self.shape {
            EnvelopeShape::Gaussian => self.truncation * self.fwhm,
            EnvelopeShape::Cos2FlatTop => 0.5 * self.fwhm + 0.5 * self.truncation * self.fwhm,
        }
    }

    /// `(start, end)` of the pulse, ps.
    pub fn window(&self) -> (f64, f64) {
        let h = self.half_window();
        (self.center - h, self.center + h)
    }

    /// Envelope normalized to 1 at the peak; zero outside the window.
    pub fn normalized(&self, t: f64) -> f64 {
        let tau = (t - self.center).abs();
        if tau > self.half_window() {
            return 0.0;
        }
        match self.shape {
            EnvelopeShape::Gaussian => {
                let x = tau / self.fwhm;
                (-4.0 * LN_2 * x * x).exp()
            }
            EnvelopeShape::Cos2FlatTop => {
                let ramp = self.truncation * self.fwhm;
                let flat_edge = 0.5 * self.fwhm - 0.5 * ramp;
                if tau <= flat_edge {
                    1.0
                } else {
                    let c = (0.5 * PI * (tau - flat_edge) / ramp).cos();
                    c * c
                }
            }
        }
    }

    /// Intensity in W/cm².
    pub fn intensity(&self, t: f64) -> f64 {
        self.peak_intensity * self.normalized(t)
    }

    /// ∫ I(t) dt over the support, W·ps/cm² (composite Simpson).
    pub fn fluence(&self) -> f64 {
        let (a, b) = self.window();
        let n = 4000;
        let h = (b - a) / n as f64;
        let mut acc = self.intensity(a) + self.intensity(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.intensity(a + i as f64 * h);
        }
        acc * h / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Constant-frequency centrifuge, optionally with a small residual drift.
    CfCfg,
    /// Conventional accelerating centrifuge.
    Accelerated,
    /// Non-rotating linearly polarized pulse.
    LinearStatic,
}

impl FieldKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cfcfg" => Ok(Self::CfCfg),
            "accelerated" => Ok(Self::Accelerated),
            "linear-static" => Ok(Self::LinearStatic),
            other => Err(Error::InvalidParameter(format!("unknown field kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::CfCfg => "cfcfg",
            Self::Accelerated => "accelerated",
            Self::LinearStatic => "linear-static",
        }
    }
}

/// Immutable description of the driving pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldWaveform {
    pub envelope: EnvelopeSpec,
    /// Polarization rotation frequency at the envelope peak, GHz.
    pub f0: f64,
    /// Linear frequency drift, GHz/ps.
    pub drift_rate: f64,
    pub phase0: f64,
    pub kind: FieldKind,
}

impl FieldWaveform {
    pub fn new(envelope: EnvelopeSpec, f0: f64, drift_rate: f64, phase0: f64, kind: FieldKind) -> Result<Self> {
        if !f0.is_finite() || !drift_rate.is_finite() || !phase0.is_finite() {
            return Err(Error::InvalidParameter("field parameters must be finite".into()));
        }
        if kind == FieldKind::LinearStatic && (f0 != 0.0 || drift_rate != 0.0) {
            return Err(Error::InvalidParameter("linear-static field must have f0 = 0 and zero drift".into()));
        }
        Ok(Self { envelope, f0, drift_rate, phase0, kind })
    }

    pub fn cfcfg(envelope: EnvelopeSpec, f0: f64) -> Result<Self> {
        Self::new(envelope, f0, 0.0, 0.0, FieldKind::CfCfg)
    }

    /// Constant-frequency centrifuge whose frequency drifts linearly by
    /// `spread_ghz` across the full pulse window.
    pub fn cfcfg_with_drift(envelope: EnvelopeSpec, f0: f64, spread_ghz: f64) -> Result<Self> {
        let (a, b) = envelope.window();
        Self::new(envelope, f0, spread_ghz / (b - a), 0.0, FieldKind::CfCfg)
    }

    pub fn linear_static(envelope: EnvelopeSpec, phase0: f64) -> Result<Self> {
        Self::new(envelope, 0.0, 0.0, phase0, FieldKind::LinearStatic)
    }

    pub fn window(&self) -> (f64, f64) {
        self.envelope.window()
    }

    pub fn normalized_envelope(&self, t: f64) -> f64 {
        self.envelope.normalized(t)
    }

    /// Polarization angle φ(t) in the XZ plane, measured from X toward Z.
    pub fn polarization_angle(&self, t: f64) -> f64 {
        if self.kind == FieldKind::LinearStatic {
            return self.phase0;
        }
        let tau = t - self.envelope.center;
        self.phase0 + TAU * 1e-3 * (self.f0 * tau + 0.5 * self.drift_rate * tau * tau)
    }

    /// Instantaneous rotation frequency, GHz.
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f0 + self.drift_rate * (t - self.envelope.center)
    }

    /// dφ/dt in rad/ps.
    pub fn angular_velocity(&self, t: f64) -> f64 {
        TAU * 1e-3 * self.instantaneous_frequency(t)
    }

    /// Polarization unit vector (X, Y, Z).
    pub fn polarization(&self, t: f64) -> [f64; 3] {
        let (s, c) = self.polarization_angle(t).sin_cos();
        [c, 0.0, s]
    }
}

/// Rotation frequency of the field formed by two counter-circular copies of
/// a chirped pulse delayed by `delay` ps: half their instantaneous
/// frequency difference.
pub fn cfcfg_from_interferometer(chirp_rate_ghz_per_ps: f64, delay_ps: f64) -> Result<f64> {
    if !(delay_ps >= 0.0) {
        return Err(Error::InvalidParameter(format!("delay must be >= 0, got {delay_ps}")));
    }
    Ok(0.5 * chirp_rate_ghz_per_ps * delay_ps)
}

/// Squared peak field amplitude in atomic units for an intensity in W/cm².
pub fn intensity_to_field_squared(intensity: f64) -> f64 {
    intensity / ATOMIC_UNIT_INTENSITY_W_CM2
}

/// Depth of the induced-dipole potential, `¼ Δα E₀²`, in cm⁻¹.
///
/// `delta_alpha` is the polarizability anisotropy in atomic units.
pub fn coupling_depth(intensity: f64, delta_alpha: f64) -> f64 {
    0.25 * delta_alpha * intensity_to_field_squared(intensity) * HARTREE_WAVENUMBER
}

/// Polarizability anisotropy giving a depth of `depth` cm⁻¹ at `intensity`.
pub fn delta_alpha_for_depth(depth: f64, intensity: f64) -> f64 {
    depth / (0.25 * intensity_to_field_squared(intensity) * HARTREE_WAVENUMBER)
}
