use rayon::prelude::*;

use super::config::{ExperimentConfig, Scenario};
use crate::analysis::{
    extract_byz, fit_decaying_sinusoid, fit_exponential_decay, fit_resonance_peak, DecayFit, PeakFit, ScanCurve,
    SinusoidOutcome, ISOTROPIC_OFFSET,
};
use crate::dynamics::{
    ensemble_run, ensemble_run_relaxing_in_field, thermal_members, DensityTrajectory, Mixture, PropagationOptions,
    QuantumState, RelaxationParams, RotorSystem,
};
use crate::error::{Error, Result};
use crate::field::FieldWaveform;
use crate::observables::{cos2theta_2d_sampled, exact_trace, point_seed, sampled_trace, AlignmentTrace, Detector};
use crate::rotor::Basis;

/// Seed stream of the reference trace, kept apart from the per-delay
/// streams of the main trace.
const REFERENCE_STREAM: u64 = 1 << 40;
/// Extra levels used by the basis-size convergence check.
pub const J_MAX_CHECK_STEP: u32 = 4;

/// Everything needed to simulate one configuration at one basis size.
pub struct Simulation {
    pub system: RotorSystem,
    pub detector: Detector,
    pub weights: Vec<f64>,
    pub members: Vec<QuantumState>,
    pub relax: RelaxationParams,
    pub options: PropagationOptions,
    in_field_relax: Option<f64>,
}

impl Simulation {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Self::with(cfg, cfg.sim.j_max, cfg.sim.dt)
    }

    pub fn with(cfg: &ExperimentConfig, j_max: u32, dt: f64) -> Result<Self> {
        let system = RotorSystem::new(Basis::linear_rotor(j_max), cfg.molecule)?;
        let detector = Detector::new(&system)?;
        let t0 = cfg.field.envelope.window().0;
        let (weights, members) = thermal_members(&system, cfg.sim.ensemble_tail, cfg.sim.fold_mirror, t0)?;
        let relax = RelaxationParams::thermal(&system, cfg.relax.tau_coh, cfg.relax.tau_pop)?;
        let options = PropagationOptions::with_dt(dt).integrator(cfg.sim.integrator);
        let in_field_relax = cfg.relax.in_field.then_some(cfg.relax.split_dt);
        Ok(Self { system, detector, weights, members, relax, options, in_field_relax })
    }

    pub fn trajectory(&self, field: &FieldWaveform, times: &[f64]) -> Result<DensityTrajectory> {
        match self.in_field_relax {
            Some(split) => ensemble_run_relaxing_in_field(
                &self.system,
                &self.weights,
                &self.members,
                field,
                times,
                &self.relax,
                &self.options,
                split,
            ),
            None => {
                ensemble_run(&self.system, &self.weights, &self.members, field, times, Some(&self.relax), &self.options)
            }
        }
    }

    /// Exact observable of the J = 0 member alone, with relaxation.
    fn ground_trace(&self, field: &FieldWaveform, times: &[f64]) -> Result<Vec<f64>> {
        let t0 = field.window().0;
        let g = QuantumState::basis_state(&self.system, 0, 0, t0)?;
        let traj = ensemble_run(&self.system, &[1.0], &[g], field, times, Some(&self.relax), &self.options)?;
        Ok(traj.states.iter().map(|m| self.detector.cos2theta_2d(m)).collect())
    }
}

/// Largest observable change under dt halving and under `J_max + 4`,
/// evaluated exactly on the ground-state member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceDeltas {
    pub dt_halving: f64,
    pub j_max: f64,
}

pub fn convergence_deltas(cfg: &ExperimentConfig, field: &FieldWaveform, times: &[f64]) -> Result<ConvergenceDeltas> {
    let base = Simulation::new(cfg)?.ground_trace(field, times)?;
    let fine = Simulation::with(cfg, cfg.sim.j_max, 0.5 * cfg.sim.dt)?.ground_trace(field, times)?;
    let big = Simulation::with(cfg, cfg.sim.j_max + J_MAX_CHECK_STEP, cfg.sim.dt)?.ground_trace(field, times)?;
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(ConvergenceDeltas { dt_halving: max_diff(&base, &fine), j_max: max_diff(&base, &big) })
}

fn check_scenario(cfg: &ExperimentConfig, want: &[Scenario]) -> Result<()> {
    if want.contains(&cfg.scenario) {
        Ok(())
    } else {
        Err(Error::Config(format!("scenario `{}` does not match this run", cfg.scenario.name())))
    }
}

fn metadata(cfg: &ExperimentConfig, what: &str) -> String {
    format!("{what}; seed {}; n_ions {}", cfg.seed, cfg.n_ions)
}

#[derive(Debug, Clone)]
pub struct InfieldResult {
    pub trace: AlignmentTrace,
    pub exact: AlignmentTrace,
    pub fit: SinusoidOutcome,
}

/// Probe during the pulse and fit the pendular oscillation.
pub fn run_infield(cfg: &ExperimentConfig) -> Result<InfieldResult> {
    check_scenario(cfg, &[Scenario::Infield])?;
    let sim = Simulation::new(cfg)?;
    let field = cfg.field.waveform(cfg.field.f0_ghz)?;
    let times = cfg.delays.points();
    let traj = sim.trajectory(&field, &times).map_err(|e| e.context("in-field propagation"))?;
    let meta = metadata(cfg, &format!("infield f0 {} GHz", cfg.field.f0_ghz));
    let trace = sampled_trace(&sim.detector, &traj, cfg.n_ions, cfg.seed, cfg.min_radius, &meta)?;
    let exact = exact_trace(&sim.detector, &traj, &meta)?;
    let fit = fit_decaying_sinusoid(&trace.window(cfg.fit_window.0, cfg.fit_window.1))
        .map_err(|e| e.context("sinusoid fit"))?;
    Ok(InfieldResult { trace, exact, fit })
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub curve: ScanCurve,
    pub exact: Vec<f64>,
    /// Peak fit, or the reason it failed (for example an unbracketed peak).
    pub peak: std::result::Result<PeakFit, String>,
    /// `(B_yz, standard error)` in cm⁻¹ from the fitted center.
    pub byz: Option<(f64, f64)>,
}

/// Observable at the fixed probe delay for each grid frequency.
pub fn run_scan(cfg: &ExperimentConfig) -> Result<ScanResult> {
    check_scenario(cfg, &[Scenario::Scan])?;
    let sim = Simulation::new(cfg)?;
    let freqs = cfg.scan.values();
    let points: Vec<(f64, f64, f64)> =
        freqs.par_iter().enumerate().map(|(i, &f)| scan_point(cfg, &sim, i, f)).collect::<Result<_>>()?;
    let curve =
        ScanCurve::new(freqs.clone(), points.iter().map(|p| p.0).collect(), points.iter().map(|p| p.1).collect())?;
    let exact = points.iter().map(|p| p.2).collect();
    let peak = fit_resonance_peak(&curve, cfg.peak_model).map_err(|e| e.to_string());
    let byz = match &peak {
        Ok(p) if p.center > 0.0 => {
            let b = extract_byz(p.center, cfg.byz_level)?;
            Some((b, b * p.center_err() / p.center))
        }
        _ => None,
    };
    Ok(ScanResult { curve, exact, peak, byz })
}

/// One scan point: `(sampled value, stderr, exact value)`.
pub fn scan_point(cfg: &ExperimentConfig, sim: &Simulation, index: usize, f: f64) -> Result<(f64, f64, f64)> {
    let field = cfg.field.waveform(f)?;
    let traj = sim.trajectory(&field, &[cfg.probe_delay]).map_err(|e| e.context(format!("scan point {f} GHz")))?;
    let mix: &Mixture = &traj.states[0];
    let s = cos2theta_2d_sampled(&sim.detector, mix, cfg.n_ions, point_seed(cfg.seed, index as u64), cfg.min_radius)?;
    Ok((s.value, s.stderr, sim.detector.cos2theta_2d(mix)))
}

#[derive(Debug, Clone)]
pub struct DecayResult {
    pub resonant: AlignmentTrace,
    pub resonant_exact: AlignmentTrace,
    pub reference: AlignmentTrace,
    pub reference_exact: AlignmentTrace,
    pub fit: DecayFit,
}

/// The linear-static pulse with the configured envelope.
pub fn reference_field(cfg: &ExperimentConfig) -> Result<FieldWaveform> {
    FieldWaveform::linear_static(cfg.field.envelope, cfg.field.phase0)
}

fn reference_traces(
    cfg: &ExperimentConfig,
    sim: &Simulation,
    times: &[f64],
) -> Result<(AlignmentTrace, AlignmentTrace)> {
    let field = reference_field(cfg)?;
    let traj = sim.trajectory(&field, times).map_err(|e| e.context("reference propagation"))?;
    let meta = metadata(cfg, "adiabatic reference");
    let seed = point_seed(cfg.seed, REFERENCE_STREAM);
    Ok((
        sampled_trace(&sim.detector, &traj, cfg.n_ions, seed, cfg.min_radius, &meta)?,
        exact_trace(&sim.detector, &traj, &meta)?,
    ))
}

/// Resonant run with relaxation, the linear-static reference and the
/// fixed-asymptote exponential fit over the configured window.
pub fn run_decay(cfg: &ExperimentConfig) -> Result<DecayResult> {
    check_scenario(cfg, &[Scenario::Decay])?;
    if cfg.delays.stop < 3300.0 {
        return Err(Error::Config(format!("decay delays must extend to >= 3300 ps, got {}", cfg.delays.stop)));
    }
    let sim = Simulation::new(cfg)?;
    let times = cfg.delays.points();
    let field = cfg.field.waveform(cfg.field.f0_ghz)?;
    let traj = sim.trajectory(&field, &times).map_err(|e| e.context("resonant propagation"))?;
    let meta = metadata(cfg, &format!("decay f0 {} GHz", cfg.field.f0_ghz));
    let resonant = sampled_trace(&sim.detector, &traj, cfg.n_ions, cfg.seed, cfg.min_radius, &meta)?;
    let resonant_exact = exact_trace(&sim.detector, &traj, &meta)?;
    let (reference, reference_exact) = reference_traces(cfg, &sim, &times)?;
    let window = resonant.window(cfg.fit_window.0, cfg.fit_window.1);
    let fit = fit_exponential_decay(&window, ISOTROPIC_OFFSET).map_err(|e| e.context("decay fit"))?;
    Ok(DecayResult { resonant, resonant_exact, reference, reference_exact, fit })
}

/// The reference pulse alone.
pub fn run_adiabatic_reference(cfg: &ExperimentConfig) -> Result<(AlignmentTrace, AlignmentTrace)> {
    check_scenario(cfg, &[Scenario::AdiabaticReference])?;
    let sim = Simulation::new(cfg)?;
    reference_traces(cfg, &sim, &cfg.delays.points())
}

/// Field and delays whose convergence the manifest reports.
pub fn diagnostic_setup(cfg: &ExperimentConfig) -> Result<(FieldWaveform, Vec<f64>)> {
    match cfg.scenario {
        Scenario::Scan => {
            let f = cfg.scan.values();
            Ok((cfg.field.waveform(f[f.len() / 2])?, vec![cfg.probe_delay]))
        }
        Scenario::AdiabaticReference => Ok((reference_field(cfg)?, cfg.delays.points())),
        _ => Ok((cfg.field.waveform(cfg.field.f0_ghz)?, cfg.delays.points())),
    }
}
