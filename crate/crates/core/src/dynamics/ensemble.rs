//! Thermal ensemble: one pure-state trajectory per initial eigenstate,
//! mixed with Boltzmann weights after (optional) relaxation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::propagate::{propagate, PropagationOptions, QuantumState};
use super::relax::{dissipate, field_free_relax, relax_pure_states, Mixture, RelaxationParams};
use super::system::RotorSystem;
use crate::error::{Error, Result};
use crate::field::FieldWaveform;
use crate::rotor::thermal_weights;

/// Default Boltzmann weight allowed to be dropped from the top of the
/// ensemble.
pub const DEFAULT_ENSEMBLE_TAIL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Mixture>,
}

impl DensityTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Initial thermal members `|J, M⟩` with their weights.
///
/// The highest J levels are dropped while their cumulative weight stays
/// within `tail`, and the remaining weights are renormalized. With
/// `fold_mirror`, `|J, −M⟩` is merged into `|J, M⟩` (M > 0) with doubled
/// weight: the Hamiltonian, the relaxation model and the detected
/// observable are all even under the reflection Y → −Y, which maps one
/// onto the other.
pub fn thermal_members(
    system: &RotorSystem,
    tail: f64,
    fold_mirror: bool,
    time: f64,
) -> Result<(Vec<f64>, Vec<QuantumState>)> {
    if !(0.0..1.0).contains(&tail) {
        return Err(Error::InvalidParameter(format!("ensemble tail must be in [0, 1), got {tail}")));
    }
    let basis = system.basis();
    let w = thermal_weights(basis, system.params())?;
    let mut per_j = vec![0.0; basis.j_max() as usize + 1];
    for (s, x) in basis.states().iter().zip(&w) {
        per_j[s.j as usize] += x;
    }
    let mut j_top = basis.j_max() as usize;
    let mut dropped = 0.0;
    while j_top > 0 && dropped + per_j[j_top] <= tail {
        dropped += per_j[j_top];
        j_top -= 1;
    }
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for (s, &x) in basis.states().iter().zip(&w) {
        if s.j as usize > j_top || x == 0.0 {
            continue;
        }
        let x = if fold_mirror {
            if s.m < 0 {
                continue;
            }
            if s.m > 0 {
                2.0 * x
            } else {
                x
            }
        } else {
            x
        };
        weights.push(x);
        states.push(QuantumState::basis_state(system, s.j, s.m, time)?);
    }
    let z: f64 = weights.iter().sum();
    for x in &mut weights {
        *x /= z;
    }
    Ok((weights, states))
}

/// Propagates every member through `field`, then relaxes after the pulse
/// end. The mixture at each time is reduced in member order, so the
/// result does not depend on scheduling. Without `relax` the evolution is
/// unitary throughout.
pub fn ensemble_run(
    system: &RotorSystem,
    weights: &[f64],
    initial: &[QuantumState],
    field: &FieldWaveform,
    times: &[f64],
    relax: Option<&RelaxationParams>,
    options: &PropagationOptions,
) -> Result<DensityTrajectory> {
    if weights.len() != initial.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), got: initial.len() });
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("ensemble weights must be finite and >= 0".into()));
    }
    let t_end = field.window().1;
    let split = match relax {
        Some(_) => times.partition_point(|&t| t <= t_end),
        None => times.len(),
    };
    let mut prop_times = times[..split].to_vec();
    if split < times.len() {
        prop_times.push(t_end);
    }

    let runs: Vec<Vec<QuantumState>> =
        initial.par_iter().map(|s| propagate(system, s, field, &prop_times, options)).collect::<Result<_>>()?;

    let mut states = Vec::with_capacity(times.len());
    for k in 0..split {
        let pure =
            weights.iter().zip(&runs).filter(|(&w, _)| w > 0.0).map(|(&w, r)| (w, r[k].amplitudes.clone())).collect();
        states.push(Mixture { pure, diagonal: Vec::new() });
    }
    if let (Some(relax), true) = (relax, split < times.len()) {
        let ends: Vec<(f64, DVector<Complex64>)> = weights
            .iter()
            .zip(&runs)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, r)| (w, r[split].amplitudes.clone()))
            .collect();
        for &t in &times[split..] {
            states.push(relax_pure_states(system, &ends, t - t_end, relax)?);
        }
    }
    Ok(DensityTrajectory { times: times.to_vec(), states })
}

/// Dense-density variant that also applies the relaxation map during the
/// pulse, by Lie splitting with steps no longer than `split_dt`. Far more
/// expensive than [`ensemble_run`]; meant for exploring in-field damping.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_run_relaxing_in_field(
    system: &RotorSystem,
    weights: &[f64],
    initial: &[QuantumState],
    field: &FieldWaveform,
    times: &[f64],
    relax: &RelaxationParams,
    options: &PropagationOptions,
    split_dt: f64,
) -> Result<DensityTrajectory> {
    if weights.len() != initial.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), got: initial.len() });
    }
    if !(split_dt > 0.0) {
        return Err(Error::InvalidParameter(format!("split step must be > 0, got {split_dt}")));
    }
    let Some(t0) = initial.first().map(|s| s.time) else {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    };
    if initial.iter().any(|s| s.time != t0) {
        return Err(Error::InvalidParameter("ensemble members must share the initial time".into()));
    }
    let n = system.dim();
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for (w, s) in weights.iter().zip(initial) {
        rho += &s.amplitudes * s.amplitudes.adjoint() * Complex64::new(*w, 0.0);
    }
    let (w0, w1) = field.window();
    let mut states = Vec::with_capacity(times.len());
    let mut t = t0;
    for &t_out in times {
        if t_out < t {
            return Err(Error::InvalidParameter("output times must be ascending".into()));
        }
        while t < t_out {
            let in_pulse = t >= w0 && t < w1;
            let t_next = if in_pulse {
                t_out.min(w1).min(t + split_dt)
            } else if t < w0 {
                t_out.min(w0)
            } else {
                t_out
            };
            if in_pulse {
                rho = unitary_step(system, &rho, field, t, t_next, options)?;
                rho = dissipate(system.frame(), &rho, t_next - t, relax);
            } else if t >= w1 {
                rho = field_free_relax(system, &rho, &[t_next - t], relax)?.remove(0);
            } else {
                rho = unitary_step(system, &rho, field, t, t_next, options)?;
            }
            t = t_next;
        }
        states.push(Mixture::from_density(&rho));
    }
    Ok(DensityTrajectory { times: times.to_vec(), states })
}

fn unitary_step(
    system: &RotorSystem,
    rho: &DMatrix<Complex64>,
    field: &FieldWaveform,
    ta: f64,
    tb: f64,
    options: &PropagationOptions,
) -> Result<DMatrix<Complex64>> {
    let n = system.dim();
    let cols: Vec<DVector<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut e = DVector::zeros(n);
            e[k] = Complex64::new(1.0, 0.0);
            propagate(system, &QuantumState::new(e, ta), field, &[tb], options).map(|mut v| v.remove(0).amplitudes)
        })
        .collect::<Result<_>>()?;
    let u = DMatrix::from_columns(&cols);
    Ok(&u * rho * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::EnvelopeSpec;
    use crate::rotor::{Basis, RotorParams};

    fn setup() -> (RotorSystem, FieldWaveform) {
        let sys = RotorSystem::new(Basis::linear_rotor(6), RotorParams::no_dimer_droplet()).unwrap();
        let env = EnvelopeSpec::gaussian(5e11, 20.0).unwrap();
        (sys, FieldWaveform::cfcfg(env, 8.0).unwrap())
    }

    #[test]
    fn members_cover_the_thermal_weight() {
        let (sys, _) = setup();
        let (w, s) = thermal_members(&sys, 1e-4, true, 0.0).unwrap();
        assert_eq!(w.len(), s.len());
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(s.iter().all(|q| q.j_populations(&sys)[..=5].iter().sum::<f64>() == 1.0));
        let (w_all, _) = thermal_members(&sys, 0.0, false, 0.0).unwrap();
        assert_eq!(w_all.len(), sys.dim());
    }

    #[test]
    fn single_member_matches_propagate() {
        let (sys, field) = setup();
        let init = QuantumState::basis_state(&sys, 1, 1, -60.0).unwrap();
        let times = [-10.0, 0.0, 30.0];
        let opts = PropagationOptions::default();
        let traj = ensemble_run(&sys, &[1.0], std::slice::from_ref(&init), &field, &times, None, &opts).unwrap();
        let direct = propagate(&sys, &init, &field, &times, &opts).unwrap();
        for (m, d) in traj.states.iter().zip(&direct) {
            assert_eq!(m.pure[0].1, d.amplitudes);
        }
    }

    #[test]
    fn member_order_does_not_matter() {
        let (sys, field) = setup();
        let (w, s) = thermal_members(&sys, 1e-3, true, -60.0).unwrap();
        let relax = RelaxationParams::thermal(&sys, 30.0, 200.0).unwrap();
        let opts = PropagationOptions::default();
        let times = [0.0, 70.0, 200.0];
        let a = ensemble_run(&sys, &w, &s, &field, &times, Some(&relax), &opts).unwrap();
        let (mut w2, mut s2) = (w.clone(), s.clone());
        w2.reverse();
        s2.reverse();
        let b = ensemble_run(&sys, &w2, &s2, &field, &times, Some(&relax), &opts).unwrap();
        let frame = sys.frame();
        for (x, y) in a.states.iter().zip(&b.states) {
            let d = x.to_density(frame) - y.to_density(frame);
            assert!(d.iter().all(|z| z.norm() < 1e-14));
        }
    }

    #[test]
    fn weight_count_mismatch_is_rejected() {
        let (sys, field) = setup();
        let init = QuantumState::basis_state(&sys, 0, 0, -60.0).unwrap();
        let r = ensemble_run(&sys, &[0.5, 0.5], &[init], &field, &[0.0], None, &PropagationOptions::default());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn in_field_relaxation_reduces_to_post_pulse_model_without_field() {
        let sys = RotorSystem::new(Basis::linear_rotor(3), RotorParams::no_dimer_droplet()).unwrap();
        let env = EnvelopeSpec::gaussian(0.0, 10.0).unwrap();
        let field = FieldWaveform::cfcfg(env, 8.0).unwrap();
        let relax = RelaxationParams::thermal(&sys, 20.0, 60.0).unwrap();
        let mut v = DVector::zeros(sys.dim());
        v[0] = Complex64::new(0.6, 0.0);
        v[6] = Complex64::new(0.0, 0.8);
        let init = QuantumState::new(v.clone(), 25.0);
        let opts = PropagationOptions::default();
        let times = [40.0, 90.0];
        let a = ensemble_run_relaxing_in_field(
            &sys,
            &[1.0],
            std::slice::from_ref(&init),
            &field,
            &times,
            &relax,
            &opts,
            5.0,
        )
        .unwrap();
        let rho = &v * v.adjoint();
        let want = field_free_relax(&sys, &rho, &[15.0, 65.0], &relax).unwrap();
        for (m, d) in a.states.iter().zip(&want) {
            let e = (m.to_density(sys.frame()) - d).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(e < 1e-10, "{e} {}", m.trace());
        }
    }
}
