//! Field-free relaxation after the pulse.
//!
//! Working in the joint eigenbasis of H0 and J_Y (see [`FieldFreeFrame`]),
//! coherences decay with `tau_coh` on top of their free phases and
//! populations relax toward the thermal state with `tau_pop`:
//!
//! ```text
//! ρ(t) = c·U ρ0 U† + Σ_n [(p − c)·ρ0_nn + (1 − p)·ρeq_n] |n⟩⟨n|
//! c = exp(−t/tau_coh),  p = exp(−t/tau_pop)
//! ```
//!
//! The map is completely positive only when `p ≥ c`, so `tau_coh` may not
//! exceed `tau_pop`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::frame::FieldFreeFrame;
use super::propagate::free_phase_full;
use super::system::{check_dim, RotorSystem};
use crate::error::{Error, Result};
use crate::rotor::thermal_weights;
use crate::units::RAD_PER_PS_PER_WAVENUMBER;

pub const DEFAULT_TAU_COH_PS: f64 = 100.0;
pub const DEFAULT_TAU_POP_PS: f64 = 3200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationParams {
    /// ps; `f64::INFINITY` disables coherence decay.
    pub tau_coh: f64,
    /// ps; `f64::INFINITY` disables population decay.
    pub tau_pop: f64,
    /// Equilibrium populations in the field-free frame, summing to 1.
    pub rho_eq: Vec<f64>,
}

impl RelaxationParams {
    pub fn new(tau_coh: f64, tau_pop: f64, rho_eq: Vec<f64>) -> Result<Self> {
        for (name, tau) in [("tau_coh", tau_coh), ("tau_pop", tau_pop)] {
            if tau.is_nan() || tau <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {tau}")));
            }
        }
        if tau_coh > tau_pop {
            return Err(Error::InvalidParameter(format!(
                "tau_coh ({tau_coh} ps) may not exceed tau_pop ({tau_pop} ps): the relaxed density would lose positivity"
            )));
        }
        if rho_eq.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("equilibrium populations must be >= 0".into()));
        }
        let tr: f64 = rho_eq.iter().sum();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("equilibrium trace is {tr}, expected 1")));
        }
        Ok(Self { tau_coh, tau_pop, rho_eq })
    }

    /// Thermal equilibrium of H0 at the system temperature. The weights are
    /// uniform within each J, so they are diagonal in any M quantization.
    pub fn thermal(system: &RotorSystem, tau_coh: f64, tau_pop: f64) -> Result<Self> {
        let w = thermal_weights(system.basis(), system.params())?;
        Self::new(tau_coh, tau_pop, w)
    }

    /// No relaxation at all.
    pub fn none(system: &RotorSystem) -> Result<Self> {
        Self::thermal(system, f64::INFINITY, f64::INFINITY)
    }

    /// `(c, p)` after `t` ps of relaxation.
    pub fn factors(&self, t: f64) -> (f64, f64) {
        (decay(t, self.tau_coh), decay(t, self.tau_pop))
    }
}

fn decay(t: f64, tau: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else {
        (-t / tau).exp()
    }
}

/// Ensemble state as weighted pure states (Z-quantized basis) plus a
/// diagonal part in the field-free frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub pure: Vec<(f64, DVector<Complex64>)>,
    /// Frame populations; empty when there is no diagonal part.
    pub diagonal: Vec<f64>,
}

impl Mixture {
    pub fn pure_state(psi: DVector<Complex64>) -> Self {
        Self { pure: vec![(1.0, psi)], diagonal: Vec::new() }
    }

    pub fn trace(&self) -> f64 {
        self.pure.iter().map(|(w, v)| w * v.norm_squared()).sum::<f64>() + self.diagonal.iter().sum::<f64>()
    }

    /// Dense density matrix in the Z-quantized basis.
    pub fn to_density(&self, frame: &FieldFreeFrame) -> DMatrix<Complex64> {
        let n = frame.dim();
        let mut rho = DMatrix::zeros(n, n);
        for (w, v) in &self.pure {
            rho += v * v.adjoint() * Complex64::new(*w, 0.0);
        }
        if !self.diagonal.is_empty() {
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                n,
                self.diagonal.iter().map(|&x| Complex64::new(x, 0.0)),
            ));
            rho += frame.matrix_from_frame(&d);
        }
        rho
    }

    /// Spectral decomposition of a density matrix; eigenvalues below
    /// `1e-14` are dropped.
    pub fn from_density(rho: &DMatrix<Complex64>) -> Self {
        let (values, vectors) = hermitian_eigen(rho);
        let pure = values.into_iter().zip(vectors).filter(|(w, _)| *w > 1e-14).map(|(w, v)| (0.5 * w, v)).collect();
        Self { pure, diagonal: Vec::new() }
    }
}

/// Eigenpairs of a Hermitian matrix through its real symmetric embedding
/// `[[Re, −Im], [Im, Re]]`. Every eigenvalue appears twice, and
/// `Σ λ_k v_k v_k†` over all returned pairs equals twice the input.
pub fn hermitian_eigen(a: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let n = a.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = a[(r, c)];
            m[(r, c)] = z.re;
            m[(r + n, c + n)] = z.re;
            m[(r, c + n)] = -z.im;
            m[(r + n, c)] = z.im;
        }
    }
    let eig = m.symmetric_eigen();
    let vectors = (0..2 * n)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            DVector::from_iterator(n, (0..n).map(|r| Complex64::new(col[r], col[r + n])))
        })
        .collect();
    (eig.eigenvalues.iter().copied().collect(), vectors)
}

/// Relaxes a set of weighted pure states, given at the pulse end, for `t`
/// ps. Pure components keep their relative phases (free evolution) with
/// weight scaled by `c`; the rest moves to the frame diagonal.
pub fn relax_pure_states(
    system: &RotorSystem,
    states: &[(f64, DVector<Complex64>)],
    t: f64,
    relax: &RelaxationParams,
) -> Result<Mixture> {
    check_dim(system.dim(), relax.rho_eq.len())?;
    let (c, p) = relax.factors(t);
    let frame = system.frame();
    let mut diagonal = vec![0.0; system.dim()];
    let mut pure = Vec::with_capacity(states.len());
    let mut total = 0.0;
    for (w, psi) in states {
        check_dim(system.dim(), psi.len())?;
        total += w;
        if p > c {
            let y = frame.to_frame(psi);
            for (d, z) in diagonal.iter_mut().zip(y.iter()) {
                *d += (p - c) * w * z.norm_sqr();
            }
        }
        if c > 0.0 {
            let mut v = psi.clone();
            free_phase_full(system, &mut v, t);
            pure.push((c * w, v));
        }
    }
    if p < 1.0 {
        for (d, e) in diagonal.iter_mut().zip(&relax.rho_eq) {
            *d += (1.0 - p) * total * e;
        }
    }
    if diagonal.iter().all(|&d| d == 0.0) {
        diagonal.clear();
    }
    Ok(Mixture { pure, diagonal })
}

/// Dense reference implementation on a density matrix in the Z-quantized
/// basis. `times` are measured from the pulse end.
pub fn field_free_relax(
    system: &RotorSystem,
    rho_end: &DMatrix<Complex64>,
    times: &[f64],
    relax: &RelaxationParams,
) -> Result<Vec<DMatrix<Complex64>>> {
    let n = system.dim();
    check_dim(n, rho_end.nrows())?;
    check_dim(n, rho_end.ncols())?;
    check_dim(n, relax.rho_eq.len())?;
    let frame = system.frame();
    let r0 = frame.matrix_to_frame(rho_end);
    let omega: Vec<f64> = system.energies().iter().map(|e| e * RAD_PER_PS_PER_WAVENUMBER).collect();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let (c, p) = relax.factors(t);
        let mut r = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                r[(a, b)] = if a == b {
                    Complex64::new(relax.rho_eq[a] + (r0[(a, a)].re - relax.rho_eq[a]) * p, 0.0)
                } else {
                    r0[(a, b)] * Complex64::from_polar(c, -(omega[a] - omega[b]) * t)
                };
            }
        }
        out.push(frame.matrix_from_frame(&r));
    }
    Ok(out)
}

/// One relaxation step of length `h` applied to a dense density matrix,
/// without the free phases (for splitting against a unitary step).
pub(crate) fn dissipate(
    frame: &FieldFreeFrame,
    rho: &DMatrix<Complex64>,
    h: f64,
    relax: &RelaxationParams,
) -> DMatrix<Complex64> {
    let (c, p) = relax.factors(h);
    let mut r = frame.matrix_to_frame(rho);
    let n = r.nrows();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                r[(a, a)] = Complex64::new(relax.rho_eq[a] + (r[(a, a)].re - relax.rho_eq[a]) * p, 0.0);
            } else {
                r[(a, b)] *= c;
            }
        }
    }
    frame.matrix_from_frame(&r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{Basis, RotorParams};

    fn system() -> RotorSystem {
        RotorSystem::new(Basis::linear_rotor(4), RotorParams::no_dimer_droplet()).unwrap()
    }

    fn superposition(sys: &RotorSystem) -> DVector<Complex64> {
        let mut v = DVector::zeros(sys.dim());
        for (k, z) in v.iter_mut().enumerate() {
            *z = Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()) / (1.0 + k as f64);
        }
        v.normalize()
    }

    #[test]
    fn rejects_coherence_slower_than_population() {
        let s = system();
        assert!(RelaxationParams::thermal(&s, 500.0, 100.0).is_err());
        assert!(RelaxationParams::thermal(&s, -1.0, 100.0).is_err());
        assert!(RelaxationParams::thermal(&s, 100.0, 100.0).is_ok());
    }

    #[test]
    fn infinite_times_give_free_evolution() {
        let s = system();
        let r = RelaxationParams::none(&s).unwrap();
        let psi = superposition(&s);
        let rho = &psi * psi.adjoint();
        let out = field_free_relax(&s, &rho, &[0.0, 37.0], &r).unwrap();
        let mut v = psi.clone();
        free_phase_full(&s, &mut v, 37.0);
        let want = &v * v.adjoint();
        assert!((&out[1] - want).iter().all(|z| z.norm() < 1e-12));
        assert!((&out[0] - rho).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn coherence_magnitude_decays_exactly() {
        let s = system();
        let r = RelaxationParams::thermal(&s, 100.0, 3200.0).unwrap();
        let psi = superposition(&s);
        let rho = &psi * psi.adjoint();
        let t = 250.0;
        let out = field_free_relax(&s, &rho, &[t], &r).unwrap();
        let f = s.frame();
        let a = f.matrix_to_frame(&rho);
        let b = f.matrix_to_frame(&out[0]);
        let want = (-t / 100.0f64).exp();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                if i != j && a[(i, j)].norm() > 1e-6 {
                    assert!((b[(i, j)].norm() / a[(i, j)].norm() - want).abs() < 1e-12);
                }
            }
        }
        let tr: Complex64 = out[0].trace();
        assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
    }

    #[test]
    fn long_times_reach_equilibrium() {
        let s = system();
        let r = RelaxationParams::thermal(&s, 100.0, 3200.0).unwrap();
        let psi = superposition(&s);
        let out = field_free_relax(&s, &(&psi * psi.adjoint()), &[1e7], &r).unwrap();
        let eq =
            DMatrix::from_diagonal(&DVector::from_iterator(s.dim(), r.rho_eq.iter().map(|&x| Complex64::new(x, 0.0))));
        assert!((&out[0] - eq).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn mixture_matches_dense_and_stays_positive() {
        let s = system();
        let r = RelaxationParams::thermal(&s, 80.0, 900.0).unwrap();
        let a = superposition(&s);
        let mut b = DVector::zeros(s.dim());
        b[3] = Complex64::new(0.6, 0.0);
        b[7] = Complex64::new(0.0, 0.8);
        let states = vec![(0.3, a.clone()), (0.7, b.clone())];
        let rho = &a * a.adjoint() * Complex64::new(0.3, 0.0) + &b * b.adjoint() * Complex64::new(0.7, 0.0);
        for t in [0.0, 40.0, 300.0, 5000.0] {
            let m = relax_pure_states(&s, &states, t, &r).unwrap();
            let dense = &field_free_relax(&s, &rho, &[t], &r).unwrap()[0];
            let got = m.to_density(s.frame());
            assert!((&got - dense).iter().all(|z| z.norm() < 1e-12), "t = {t}");
            assert!((m.trace() - 1.0).abs() < 1e-12);
            let (vals, _) = hermitian_eigen(&got);
            assert!(vals.iter().all(|&x| x >= -1e-10));
        }
    }

    #[test]
    fn spectral_round_trip() {
        let s = system();
        let r = RelaxationParams::thermal(&s, 20.0, 60.0).unwrap();
        let psi = superposition(&s);
        let rho = &field_free_relax(&s, &(&psi * psi.adjoint()), &[15.0], &r).unwrap()[0];
        let back = Mixture::from_density(rho).to_density(s.frame());
        assert!((back - rho).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn dissipation_steps_compose() {
        let s = system();
        let r = RelaxationParams::thermal(&s, 50.0, 400.0).unwrap();
        let psi = superposition(&s);
        let rho = &psi * psi.adjoint();
        let f = s.frame();
        let once = dissipate(f, &rho, 60.0, &r);
        let twice = dissipate(f, &dissipate(f, &rho, 20.0, &r), 40.0, &r);
        assert!((once - twice).iter().all(|z| z.norm() < 1e-12));
    }
}
