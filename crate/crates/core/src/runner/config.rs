use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::PeakModel;
use crate::dynamics::{Integrator, DEFAULT_DT_PS, DEFAULT_ENSEMBLE_TAIL, DEFAULT_TAU_COH_PS, DEFAULT_TAU_POP_PS};
use crate::error::{Error, Result};
use crate::field::{
    EnvelopeShape, EnvelopeSpec, FieldKind, FieldWaveform, DEFAULT_DRIFT_SPREAD_GHZ, DEFAULT_FWHM_PS,
    DEFAULT_PEAK_INTENSITY, DEFAULT_TRUNCATION_FWHM,
};
use crate::observables::DEFAULT_N_IONS;
use crate::rotor::{Environment, RotorParams};

/// Keys in this section are written by the runner into manifests and
/// skipped on input, so a manifest is itself a valid config.
pub const MANIFEST_SECTION: &str = "manifest.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Infield,
    Scan,
    Decay,
    AdiabaticReference,
}

impl Scenario {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "infield" => Ok(Self::Infield),
            "scan" => Ok(Self::Scan),
            "decay" => Ok(Self::Decay),
            "adiabatic-reference" => Ok(Self::AdiabaticReference),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Infield => "infield",
            Self::Scan => "scan",
            Self::Decay => "decay",
            Self::AdiabaticReference => "adiabatic-reference",
        }
    }
}

/// Uniform delay grid, ps, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DelayGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + self.step * k as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + h * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub kind: FieldKind,
    /// GHz; for scans the grid replaces it.
    pub f0_ghz: f64,
    /// GHz across the truncated window (cfCFG only).
    pub drift_spread_ghz: f64,
    /// GHz/ps (accelerated only).
    pub acceleration: f64,
    pub phase0: f64,
    pub envelope: EnvelopeSpec,
}

impl FieldConfig {
    pub fn waveform(&self, f0: f64) -> Result<FieldWaveform> {
        match self.kind {
            FieldKind::CfCfg => FieldWaveform::new(
                self.envelope,
                f0,
                self.drift_spread_ghz / (self.envelope.window().1 - self.envelope.window().0),
                self.phase0,
                FieldKind::CfCfg,
            ),
            FieldKind::Accelerated => {
                FieldWaveform::new(self.envelope, f0, self.acceleration, self.phase0, FieldKind::Accelerated)
            }
            FieldKind::LinearStatic => FieldWaveform::linear_static(self.envelope, self.phase0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    pub tau_coh: f64,
    pub tau_pop: f64,
    /// Also damp during the pulse (dense, slow).
    pub in_field: bool,
    pub split_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub j_max: u32,
    pub dt: f64,
    pub integrator: Integrator,
    pub ensemble_tail: f64,
    pub fold_mirror: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Preset name when one was used.
    pub preset: Option<String>,
    pub molecule: RotorParams,
    pub field: FieldConfig,
    pub relax: RelaxConfig,
    pub delays: DelayGrid,
    pub scan: FrequencyGrid,
    pub probe_delay: f64,
    pub peak_model: PeakModel,
    /// Initial J assumed by B_yz extraction.
    pub byz_level: u32,
    /// Delay window of the fit, ps.
    pub fit_window: (f64, f64),
    pub n_ions: usize,
    pub min_radius: f64,
    pub sim: SimConfig,
}

/// Key-value text with dotted sections. Blank lines and lines starting
/// with `#` are skipped.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected `key = value`", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", n + 1)));
        }
        if k.starts_with(MANIFEST_SECTION) {
            continue;
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = match self.take(key) {
            Some(v) => Self::parse::<f64>(key, &v)?,
            None => default,
        };
        if !v.is_finite() {
            return Err(Error::Config(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    fn f64_required(&mut self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        let x = Self::parse::<f64>(key, &v)?;
        if !x.is_finite() {
            return Err(Error::Config(format!("`{key}` must be finite")));
        }
        Ok(x)
    }

    fn or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            Some(v) => Self::parse(key, &v),
            None => Ok(default),
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader { map: parse_pairs(text)? };
        let scenario = Scenario::parse(&r.require("scenario")?)?;
        let seed: u64 = Reader::parse("seed", &r.require("seed")?)?;

        let preset = r.take("molecule.preset");
        let mut molecule = match &preset {
            Some(name) => RotorParams::preset(name).map_err(|e| e.context("molecule.preset"))?,
            None => {
                let environment = Environment::parse(&r.require("molecule.environment")?)?;
                RotorParams {
                    b_x: r.f64_required("molecule.b_x")?,
                    b_y: r.f64_required("molecule.b_y")?,
                    b_z: r.f64_required("molecule.b_z")?,
                    d: r.f64_required("molecule.d")?,
                    delta_alpha: r.f64_required("molecule.delta_alpha")?,
                    temperature_k: r.f64_required("molecule.temperature_k")?,
                    environment,
                }
            }
        };
        if preset.is_some() {
            molecule.b_x = r.f64_or("molecule.b_x", molecule.b_x)?;
            molecule.b_y = r.f64_or("molecule.b_y", molecule.b_y)?;
            molecule.b_z = r.f64_or("molecule.b_z", molecule.b_z)?;
            molecule.d = r.f64_or("molecule.d", molecule.d)?;
            molecule.delta_alpha = r.f64_or("molecule.delta_alpha", molecule.delta_alpha)?;
            molecule.temperature_k = r.f64_or("molecule.temperature_k", molecule.temperature_k)?;
            if let Some(env) = r.take("molecule.environment") {
                molecule.environment = Environment::parse(&env)?;
            }
        }
        molecule.validate()?;

        let kind = FieldKind::parse(&r.or("field.kind", "cfcfg".to_string())?)?;
        let needs_f0 = kind != FieldKind::LinearStatic && scenario != Scenario::Scan;
        let f0_ghz = if needs_f0 { r.f64_required("field.f0_ghz")? } else { r.f64_or("field.f0_ghz", 0.0)? };
        let acceleration = if kind == FieldKind::Accelerated {
            r.f64_required("field.acceleration_ghz_per_ps")?
        } else {
            r.f64_or("field.acceleration_ghz_per_ps", 0.0)?
        };
        let envelope = EnvelopeSpec::new(
            EnvelopeShape::parse(&r.or("field.shape", "gaussian".to_string())?)?,
            r.f64_or("field.peak_intensity_w_cm2", DEFAULT_PEAK_INTENSITY)?,
            r.f64_or("field.fwhm_ps", DEFAULT_FWHM_PS)?,
            r.f64_or("field.center_ps", 0.0)?,
            r.f64_or("field.truncation_fwhm", DEFAULT_TRUNCATION_FWHM)?,
        )?;
        let field = FieldConfig {
            kind,
            f0_ghz,
            drift_spread_ghz: r.f64_or("field.drift_spread_ghz", DEFAULT_DRIFT_SPREAD_GHZ)?,
            acceleration,
            phase0: r.f64_or("field.phase0_rad", 0.0)?,
            envelope,
        };
        check(field.kind != FieldKind::LinearStatic || f0_ghz == 0.0, || {
            "linear-static field takes no field.f0_ghz".into()
        })?;

        let relax = RelaxConfig {
            tau_coh: r.f64_or("relax.tau_coh_ps", DEFAULT_TAU_COH_PS)?,
            tau_pop: r.f64_or("relax.tau_pop_ps", DEFAULT_TAU_POP_PS)?,
            in_field: r.or("relax.in_field", false)?,
            split_dt: r.f64_or("relax.split_dt_ps", 1.0)?,
        };
        check(relax.tau_coh > 0.0 && relax.tau_pop > 0.0, || "relaxation times must be > 0".into())?;
        check(relax.tau_coh <= relax.tau_pop, || {
            format!("relax.tau_coh_ps ({}) must not exceed relax.tau_pop_ps ({})", relax.tau_coh, relax.tau_pop)
        })?;
        check(relax.split_dt > 0.0, || "relax.split_dt_ps must be > 0".into())?;

        let w0 = envelope.window().0;
        let (d_start, d_stop, d_step) = match scenario {
            Scenario::Infield => (-0.5 * envelope.fwhm - 50.0, 0.5 * envelope.fwhm + 50.0, 2.0),
            _ => (w0, 3300.0, 25.0),
        };
        let delays = DelayGrid {
            start: r.f64_or("delays.start_ps", d_start)?,
            stop: r.f64_or("delays.stop_ps", d_stop)?,
            step: r.f64_or("delays.step_ps", d_step)?,
        };
        check(delays.step > 0.0 && delays.stop > delays.start, || "delay grid needs step > 0 and stop > start".into())?;
        check(delays.start >= w0, || format!("delays.start_ps must be >= the pulse window start {w0}"))?;

        let scan = FrequencyGrid {
            start: r.f64_or("scan.f_start_ghz", 4.0)?,
            stop: r.f64_or("scan.f_stop_ghz", 14.0)?,
            points: r.or("scan.points", 21usize)?,
        };
        check(scan.points >= 1 && scan.stop >= scan.start, || "scan grid needs points >= 1 and stop >= start".into())?;
        let probe_delay = r.f64_or("scan.probe_delay_ps", 550.0)?;
        check(probe_delay >= w0, || "scan.probe_delay_ps precedes the pulse".into())?;
        let peak_model = PeakModel::parse(&r.or("scan.peak_model", "gaussian".to_string())?)?;
        let byz_level = r.or("scan.byz_level", 0u32)?;

        let (f_lo, f_hi) = match scenario {
            Scenario::Decay | Scenario::AdiabaticReference => (500.0, 3300.0),
            _ => (delays.start, delays.stop),
        };
        let fit_window = (r.f64_or("fit.start_ps", f_lo)?, r.f64_or("fit.stop_ps", f_hi)?);
        check(fit_window.1 > fit_window.0, || "fit window must have stop > start".into())?;

        let n_ions = r.or("detector.n_ions", DEFAULT_N_IONS)?;
        check(n_ions >= 1, || "detector.n_ions must be >= 1".into())?;
        let min_radius = r.f64_or("detector.min_radius", 0.0)?;
        check((0.0..1.0).contains(&min_radius), || "detector.min_radius must be in [0, 1)".into())?;

        let sim = SimConfig {
            j_max: r.or("sim.j_max", 16u32)?,
            dt: r.f64_or("sim.dt_ps", DEFAULT_DT_PS)?,
            integrator: Integrator::parse(&r.or("sim.integrator", Integrator::default().name().to_string())?)?,
            ensemble_tail: r.f64_or("sim.ensemble_tail", DEFAULT_ENSEMBLE_TAIL)?,
            fold_mirror: r.or("sim.fold_mirror", true)?,
        };
        check(sim.j_max >= 1 && sim.j_max <= 60, || "sim.j_max must be in 1..=60".into())?;
        check(sim.dt > 0.0, || "sim.dt_ps must be > 0".into())?;
        check((0.0..1.0).contains(&sim.ensemble_tail), || "sim.ensemble_tail must be in [0, 1)".into())?;

        if let Some(k) = r.map.keys().next() {
            return Err(Error::UnknownKey(k.clone()));
        }
        Ok(Self {
            scenario,
            seed,
            preset,
            molecule,
            field,
            relax,
            delays,
            scan,
            probe_delay,
            peak_model,
            byz_level,
            fit_window,
            n_ions,
            min_radius,
            sim,
        })
    }

    /// Every key with its resolved value; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scenario", self.scenario.name().into());
        kv("seed", self.seed.to_string());
        if let Some(p) = &self.preset {
            kv("molecule.preset", p.clone());
        }
        let m = &self.molecule;
        kv("molecule.environment", m.environment.name().into());
        kv("molecule.b_x", m.b_x.to_string());
        kv("molecule.b_y", m.b_y.to_string());
        kv("molecule.b_z", m.b_z.to_string());
        kv("molecule.d", m.d.to_string());
        kv("molecule.delta_alpha", m.delta_alpha.to_string());
        kv("molecule.temperature_k", m.temperature_k.to_string());
        let f = &self.field;
        kv("field.kind", f.kind.name().into());
        kv("field.f0_ghz", f.f0_ghz.to_string());
        kv("field.drift_spread_ghz", f.drift_spread_ghz.to_string());
        kv("field.acceleration_ghz_per_ps", f.acceleration.to_string());
        kv("field.phase0_rad", f.phase0.to_string());
        kv("field.shape", f.envelope.shape.name().into());
        kv("field.peak_intensity_w_cm2", f.envelope.peak_intensity.to_string());
        kv("field.fwhm_ps", f.envelope.fwhm.to_string());
        kv("field.center_ps", f.envelope.center.to_string());
        kv("field.truncation_fwhm", f.envelope.truncation.to_string());
        kv("relax.tau_coh_ps", self.relax.tau_coh.to_string());
        kv("relax.tau_pop_ps", self.relax.tau_pop.to_string());
        kv("relax.in_field", self.relax.in_field.to_string());
        kv("relax.split_dt_ps", self.relax.split_dt.to_string());
        kv("delays.start_ps", self.delays.start.to_string());
        kv("delays.stop_ps", self.delays.stop.to_string());
        kv("delays.step_ps", self.delays.step.to_string());
        kv("scan.f_start_ghz", self.scan.start.to_string());
        kv("scan.f_stop_ghz", self.scan.stop.to_string());
        kv("scan.points", self.scan.points.to_string());
        kv("scan.probe_delay_ps", self.probe_delay.to_string());
        kv("scan.peak_model", self.peak_model.name().into());
        kv("scan.byz_level", self.byz_level.to_string());
        kv("fit.start_ps", self.fit_window.0.to_string());
        kv("fit.stop_ps", self.fit_window.1.to_string());
        kv("detector.n_ions", self.n_ions.to_string());
        kv("detector.min_radius", self.min_radius.to_string());
        kv("sim.j_max", self.sim.j_max.to_string());
        kv("sim.dt_ps", self.sim.dt.to_string());
        kv("sim.integrator", self.sim.integrator.name().into());
        kv("sim.ensemble_tail", self.sim.ensemble_tail.to_string());
        kv("sim.fold_mirror", self.sim.fold_mirror.to_string());
        s
    }
}
