//! Unitary propagation of a rotor state through the centrifuge pulse.
//!
//! Steps use either the exponential midpoint rule or a fourth-order
//! commutator-free Magnus scheme (two exponentials of generators sampled at
//! the Gauss points). Each exponential is summed as a Taylor series on the
//! sparse J-sector matrix. Intervals where the envelope vanishes are
//! advanced exactly with field-free phases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::system::{check_dim, GeneratorCoeffs, RotorSystem, SectorOperator};
use crate::error::{Error, Result};
use crate::field::FieldWaveform;
use crate::units::RAD_PER_PS_PER_WAVENUMBER;

/// Default propagation step, ps.
pub const DEFAULT_DT_PS: f64 = 0.2;

const MAX_TAYLOR_TERMS: usize = 80;
/// Largest `h · ‖K‖` accepted for one Taylor-summed step.
const MAX_STEP_PHASE: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: DVector<Complex64>,
    /// ps.
    pub time: f64,
}

impl QuantumState {
    pub fn new(amplitudes: DVector<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    /// `|J, M⟩` at time `time`.
    pub fn basis_state(system: &RotorSystem, j: u32, m: i32, time: f64) -> Result<Self> {
        let idx =
            system.basis().index_jm(j, m).ok_or(Error::InvalidQuantumNumbers { j: j as i64, k: 0, m: m as i64 })?;
        let mut a = DVector::zeros(system.dim());
        a[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: a, time })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Population of each J manifold.
    pub fn j_populations(&self, system: &RotorSystem) -> Vec<f64> {
        let mut p = vec![0.0; system.basis().j_max() as usize + 1];
        for (z, s) in self.amplitudes.iter().zip(system.basis().states()) {
            p[s.j as usize] += z.norm_sqr();
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Second order, one exponential per step.
    Midpoint,
    /// Fourth order, two exponentials per step.
    #[default]
    Magnus4,
}

impl Integrator {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "magnus4" => Ok(Self::Magnus4),
            _ => Err(Error::InvalidParameter(format!("unknown integrator {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Midpoint => "midpoint",
            Self::Magnus4 => "magnus4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Maximum step, ps. Intervals between output times are split into
    /// equal steps no longer than this.
    pub dt: f64,
    pub integrator: Integrator,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dt: DEFAULT_DT_PS, integrator: Integrator::default() }
    }
}

impl PropagationOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn integrator(self, integrator: Integrator) -> Self {
        Self { integrator, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Dense angle operators of one basis, for building V(t) explicitly.
#[derive(Debug, Clone)]
pub struct AngleOperators {
    pub xx: DMatrix<f64>,
    pub zz: DMatrix<f64>,
    pub xz: DMatrix<f64>,
}

impl AngleOperators {
    pub fn new(basis: &crate::rotor::Basis) -> Result<Self> {
        use crate::rotor::{angle_operator, AngleKind};
        Ok(Self {
            xx: angle_operator(AngleKind::Xx, basis)?,
            zz: angle_operator(AngleKind::Zz, basis)?,
            xz: angle_operator(AngleKind::Xz, basis)?,
        })
    }
}

/// `V(t) = −U0 · env(t) · (ε̂(t)·û)²` in cm⁻¹, with ε̂ = (cos φ, 0, sin φ).
/// The isotropic part of the polarizability is dropped.
pub fn interaction_matrix(field: &FieldWaveform, t: f64, u0_peak: f64, ops: &AngleOperators) -> Result<DMatrix<f64>> {
    let n = ops.xx.nrows();
    for m in [&ops.xx, &ops.zz, &ops.xz] {
        check_dim(n, m.nrows())?;
        check_dim(n, m.ncols())?;
    }
    let depth = -u0_peak * field.normalized_envelope(t);
    let (s, c) = field.polarization_angle(t).sin_cos();
    Ok((&ops.xx * (c * c) + &ops.zz * (s * s) + &ops.xz * (2.0 * s * c)) * depth)
}

/// Lab-frame generator coefficients (rad/ps) at time t.
fn lab_coeffs(field: &FieldWaveform, u0_peak: f64, t: f64) -> GeneratorCoeffs {
    let a = -u0_peak * field.normalized_envelope(t) * RAD_PER_PS_PER_WAVENUMBER;
    let (s, c) = field.polarization_angle(t).sin_cos();
    GeneratorCoeffs { w_h0: 1.0, a_xx: a * c * c, a_zz: a * s * s, a_xz: 2.0 * a * s * c, w_jy: 0.0 }
}

/// Co-rotating generator coefficients: the field stays along X and the
/// frame rotation adds `φ̇ J_Y`.
fn rotating_coeffs(field: &FieldWaveform, u0_peak: f64, t: f64) -> GeneratorCoeffs {
    let a = -u0_peak * field.normalized_envelope(t) * RAD_PER_PS_PER_WAVENUMBER;
    GeneratorCoeffs { w_h0: 1.0, a_xx: a, a_zz: 0.0, a_xz: 0.0, w_jy: field.angular_velocity(t) }
}

/// Propagates `initial` through `field`, returning the state at each of
/// `times` (ascending, none earlier than `initial.time`).
pub fn propagate(
    system: &RotorSystem,
    initial: &QuantumState,
    field: &FieldWaveform,
    times: &[f64],
    options: &PropagationOptions,
) -> Result<Vec<QuantumState>> {
    options.validate()?;
    check_times(initial.time, times)?;
    check_dim(system.dim(), initial.amplitudes.len())?;
    let u0 = system.peak_depth(field);
    let (w0, w1) = field.window();
    let field_on = u0 > 0.0;

    let mut out: Vec<QuantumState> =
        times.iter().map(|&t| QuantumState::new(DVector::zeros(system.dim()), t)).collect();

    for s in system.sectors_for(&initial.amplitudes) {
        let sector = &system.sectors()[s];
        let mut psi: Vec<Complex64> = sector.indices.iter().map(|&i| initial.amplitudes[i]).collect();
        let mut stepper = Stepper::new(sector, options.integrator);
        let mut t = initial.time;
        for (k, &t_next) in times.iter().enumerate() {
            advance_lab(sector, &mut stepper, &mut psi, field, u0, field_on, (w0, w1), t, t_next, options.dt)?;
            t = t_next;
            for (&i, z) in sector.indices.iter().zip(&psi) {
                out[k].amplitudes[i] = *z;
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn advance_lab(
    sector: &SectorOperator,
    stepper: &mut Stepper,
    psi: &mut [Complex64],
    field: &FieldWaveform,
    u0: f64,
    field_on: bool,
    (w0, w1): (f64, f64),
    ta: f64,
    tb: f64,
    dt: f64,
) -> Result<()> {
    if tb <= ta {
        return Ok(());
    }
    let lo = ta.max(w0).min(tb);
    let hi = tb.min(w1).max(lo);
    if !field_on || hi <= lo {
        free_phase(sector, psi, tb - ta);
        return Ok(());
    }
    free_phase(sector, psi, lo - ta);
    stepper.evolve(psi, lo, hi, dt, |t| lab_coeffs(field, u0, t))?;
    free_phase(sector, psi, tb - hi);
    Ok(())
}

/// Same dynamics integrated in the frame co-rotating with the polarization.
/// Requires a drift-free waveform; the generator is then constant apart
/// from the envelope.
pub fn propagate_rotating_frame(
    system: &RotorSystem,
    initial: &QuantumState,
    field: &FieldWaveform,
    times: &[f64],
    options: &PropagationOptions,
) -> Result<Vec<QuantumState>> {
    if field.drift_rate != 0.0 {
        return Err(Error::InvalidParameter("rotating-frame propagation needs a constant rotation frequency".into()));
    }
    options.validate()?;
    check_times(initial.time, times)?;
    check_dim(system.dim(), initial.amplitudes.len())?;
    let u0 = system.peak_depth(field);
    let (w0, w1) = field.window();
    let frame = system.frame();

    // Advance freely (lab frame) to the pulse start if needed.
    let mut out = Vec::with_capacity(times.len());
    let mut psi_lab = initial.amplitudes.clone();
    let mut t = initial.time;
    let mut chi: Option<DVector<Complex64>> = None;
    let sectors = system.sectors_for(&initial.amplitudes);

    for &t_next in times {
        if chi.is_none() && t_next > w0 && t < w1 {
            let start = t.max(w0);
            free_phase_full(system, &mut psi_lab, start - t);
            t = start;
            chi = Some(frame.rotate(&psi_lab, -field.polarization_angle(t)));
        }
        if let Some(c) = chi.as_mut() {
            let stop = t_next.min(w1);
            for &s in &sectors {
                let sector = &system.sectors()[s];
                let mut local: Vec<Complex64> = sector.indices.iter().map(|&i| c[i]).collect();
                let mut stepper = Stepper::new(sector, options.integrator);
                stepper.evolve(&mut local, t, stop, options.dt, |tt| rotating_coeffs(field, u0, tt))?;
                for (&i, z) in sector.indices.iter().zip(&local) {
                    c[i] = *z;
                }
            }
            psi_lab = frame.rotate(c, field.polarization_angle(stop));
            t = stop;
            if stop >= w1 {
                chi = None;
            }
        }
        free_phase_full(system, &mut psi_lab, t_next - t);
        t = t_next;
        out.push(QuantumState::new(psi_lab.clone(), t_next));
    }
    Ok(out)
}

fn check_times(t0: f64, times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite output time".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("output times must be ascending".into()));
    }
    if times.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter(format!("output time {} precedes the initial time {t0}", times[0])));
    }
    Ok(())
}

pub(crate) fn free_phase(sector: &SectorOperator, psi: &mut [Complex64], dt: f64) {
    if dt == 0.0 {
        return;
    }
    for (z, w) in psi.iter_mut().zip(sector.omega()) {
        *z *= Complex64::from_polar(1.0, -w * dt);
    }
}

/// Field-free evolution of a full-basis vector.
pub fn free_phase_full(system: &RotorSystem, psi: &mut DVector<Complex64>, dt: f64) {
    if dt == 0.0 {
        return;
    }
    for (z, e) in psi.iter_mut().zip(system.energies()) {
        *z *= Complex64::from_polar(1.0, -e * RAD_PER_PS_PER_WAVENUMBER * dt);
    }
}

/// Scratch space for Taylor-summed exponential steps.
struct Stepper<'a> {
    sector: &'a SectorOperator,
    integrator: Integrator,
    vals: Vec<f64>,
    term: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(sector: &'a SectorOperator, integrator: Integrator) -> Self {
        let n = sector.len();
        Self {
            sector,
            integrator,
            vals: Vec::new(),
            term: vec![Complex64::new(0.0, 0.0); n],
            tmp: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn evolve(
        &mut self,
        psi: &mut [Complex64],
        t0: f64,
        t1: f64,
        dt: f64,
        coeffs: impl Fn(f64) -> GeneratorCoeffs,
    ) -> Result<()> {
        if t1 <= t0 {
            return Ok(());
        }
        let n = ((t1 - t0) / dt).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        let r = 3f64.sqrt() / 6.0;
        let (a1, a2) = (0.25 + r, 0.25 - r);
        for k in 0..n {
            let ts = t0 + k as f64 * h;
            match self.integrator {
                Integrator::Midpoint => {
                    let c = coeffs(ts + 0.5 * h);
                    self.exp_apply(psi, &c, h)?;
                }
                Integrator::Magnus4 => {
                    let k1 = coeffs(ts + (0.5 - r) * h);
                    let k2 = coeffs(ts + (0.5 + r) * h);
                    self.exp_apply(psi, &k1.combine(a1, &k2, a2), h)?;
                    self.exp_apply(psi, &k1.combine(a2, &k2, a1), h)?;
                }
            }
        }
        Ok(())
    }

    /// `psi ← exp(−i h K) psi`.
    fn exp_apply(&mut self, psi: &mut [Complex64], c: &GeneratorCoeffs, h: f64) -> Result<()> {
        let bound = self.sector.norm_bound(c) * h;
        if bound > MAX_STEP_PHASE {
            return Err(Error::Propagation(format!(
                "step too large: h = {h} ps, h·‖K‖ ≤ {bound:.3} exceeds {MAX_STEP_PHASE}; reduce dt"
            )));
        }
        self.sector.assemble(c, &mut self.vals);
        self.term.copy_from_slice(psi);
        for k in 1..=MAX_TAYLOR_TERMS {
            self.sector.apply(&self.vals, c.w_jy, &self.term, &mut self.tmp);
            // term ← (−i h / k) K term
            let f = h / k as f64;
            let mut mag = 0.0f64;
            for (t, v) in self.term.iter_mut().zip(&self.tmp) {
                *t = Complex64::new(v.im * f, -v.re * f);
                mag = mag.max(t.norm_sqr());
            }
            for (p, t) in psi.iter_mut().zip(&self.term) {
                *p += *t;
            }
            if mag < 1e-36 {
                return Ok(());
            }
        }
        Err(Error::Propagation(format!(
            "Taylor series did not converge within {MAX_TAYLOR_TERMS} terms (h·‖K‖ ≤ {bound:.3})"
        )))
    }
}
