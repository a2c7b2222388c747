//! Detected alignment `⟨cos²θ₂D⟩`: exact evaluation on a quadrature grid and
//! emulated ion counting with shot noise.

mod detector;
mod distribution;
mod sampling;
mod trace;

pub use detector::Detector;
pub use distribution::AxisDistribution;
pub use sampling::{cos2theta_2d_sampled, point_seed, SampledValue, DEFAULT_N_IONS};
pub use trace::{exact_trace, sampled_trace, AlignmentTrace};

use crate::dynamics::Mixture;
use crate::field::FieldWaveform;

/// Exact `⟨cos²θ₂D⟩`.
pub fn cos2theta_2d_exact(detector: &Detector, mix: &Mixture) -> f64 {
    detector.cos2theta_2d(mix)
}

/// `⟨(ε̂(t)·û)²⟩` for the field polarization at time t.
pub fn cos2_3d_field(detector: &Detector, mix: &Mixture, field: &FieldWaveform, t: f64) -> f64 {
    detector.cos2_3d_field(mix, field, t)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use nalgebra::DVector;
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::dynamics::{QuantumState, RotorSystem};
    use crate::field::EnvelopeSpec;
    use crate::rotor::{Basis, RotorParams};

    fn system(j_max: u32) -> RotorSystem {
        RotorSystem::new(Basis::linear_rotor(j_max), RotorParams::no_dimer_droplet()).unwrap()
    }

    fn basis_mix(sys: &RotorSystem, j: u32, m: i32) -> Mixture {
        Mixture::pure_state(QuantumState::basis_state(sys, j, m, 0.0).unwrap().amplitudes)
    }

    fn isotropic(sys: &RotorSystem) -> Mixture {
        let n = sys.dim() as f64;
        let pure = (0..sys.dim())
            .map(|k| {
                let mut v = DVector::zeros(sys.dim());
                v[k] = Complex64::new(1.0, 0.0);
                (1.0 / n, v)
            })
            .collect();
        Mixture { pure, diagonal: Vec::new() }
    }

    fn random_state(sys: &RotorSystem, seed: &[f64]) -> DVector<Complex64> {
        let v = DVector::from_iterator(
            sys.dim(),
            (0..sys.dim()).map(|k| {
                let a = seed[k % seed.len()];
                Complex64::new((a * (k + 1) as f64).sin(), (a * 0.37 * (k + 2) as f64).cos())
            }),
        );
        v.normalize()
    }

    #[test]
    fn isotropic_is_one_half() {
        let sys = system(5);
        let det = Detector::new(&sys).unwrap();
        let mix = isotropic(&sys);
        assert!((cos2theta_2d_exact(&det, &mix) - 0.5).abs() < 1e-10);
        let dist = AxisDistribution::from_mixture(&det, &mix);
        assert!((dist.cos2theta_2d() - 0.5).abs() < 1e-10);
        assert!((dist.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn p_state_cases() {
        let sys = system(3);
        let det = Detector::new(&sys).unwrap();
        let along_z = basis_mix(&sys, 1, 0);
        assert!((cos2theta_2d_exact(&det, &along_z) - 0.5).abs() < 1e-12);
        let psi = QuantumState::basis_state(&sys, 1, 0, 0.0).unwrap().amplitudes;
        let along_x = Mixture::pure_state(sys.frame().rotate(&psi, -FRAC_PI_2));
        assert!((cos2theta_2d_exact(&det, &along_x) - 0.75).abs() < 1e-8);
        let dist = AxisDistribution::from_mixture(&det, &along_x);
        assert!((dist.expect(|u| u[0] * u[0]) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn narrow_cone_along_x_approaches_one() {
        let sys = system(16);
        let det = Detector::new(&sys).unwrap();
        // Truncated delta along Z, smoothed, then turned onto X.
        let mut v = DVector::zeros(sys.dim());
        for j in 0..=16u32 {
            let jf = j as f64;
            v[sys.basis().index_jm(j, 0).unwrap()] =
                Complex64::new((2.0 * jf + 1.0).sqrt() * (-jf * (jf + 1.0) / 120.0).exp(), 0.0);
        }
        let v = sys.frame().rotate(&v.normalize(), -FRAC_PI_2);
        let s = cos2theta_2d_exact(&det, &Mixture::pure_state(v));
        assert!(s > 0.97, "{s}");
    }

    #[test]
    fn ground_state_3d_alignment_is_one_third_both_ways() {
        let sys = system(4);
        let det = Detector::new(&sys).unwrap();
        let env = EnvelopeSpec::gaussian(1e12, 100.0).unwrap();
        let field = FieldWaveform::cfcfg(env, 8.0).unwrap();
        let g = basis_mix(&sys, 0, 0);
        assert!((cos2_3d_field(&det, &g, &field, 12.0) - 1.0 / 3.0).abs() < 1e-14);
        let mix = Mixture::pure_state(random_state(&sys, &[0.3, 1.7]));
        for t in [0.0, 21.0, 40.0] {
            let e = field.polarization(t);
            let dist = AxisDistribution::from_mixture(&det, &mix);
            let quad = dist.expect(|u| (e[0] * u[0] + e[2] * u[2]).powi(2));
            assert!((cos2_3d_field(&det, &mix, &field, t) - quad).abs() < 1e-8);
        }
    }

    #[test]
    fn plane_confinement_survives_dephasing() {
        // Incoherent mix of |J, m_Y = ±J⟩: axes confined to the XZ plane,
        // isotropic within it.
        let sys = system(8);
        let det = Detector::new(&sys).unwrap();
        let mut diagonal = vec![0.0; sys.dim()];
        for j in 2..=6u32 {
            let base = (j * j) as usize;
            diagonal[base] = 0.1;
            diagonal[base + 2 * j as usize] = 0.1;
        }
        let mix = Mixture { pure: Vec::new(), diagonal };
        assert!((mix.trace() - 1.0).abs() < 1e-12);
        let s = cos2theta_2d_exact(&det, &mix);
        assert!(s > 0.6, "{s}");
        let dist = AxisDistribution::from_mixture(&det, &mix);
        assert!((dist.cos2theta_2d() - s).abs() < 1e-10);
    }

    #[test]
    fn sampler_is_deterministic_and_consistent() {
        let sys = system(6);
        let det = Detector::new(&sys).unwrap();
        let psi = QuantumState::basis_state(&sys, 2, 0, 0.0).unwrap().amplitudes;
        let mix = Mixture::pure_state(sys.frame().rotate(&psi, -FRAC_PI_2));
        let a = cos2theta_2d_sampled(&det, &mix, 2000, 7, 0.0).unwrap();
        let b = cos2theta_2d_sampled(&det, &mix, 2000, 7, 0.0).unwrap();
        assert_eq!(a, b);
        let exact = cos2theta_2d_exact(&det, &mix);
        assert!((a.value - exact).abs() < 3.0 * a.stderr);
        assert!(cos2theta_2d_sampled(&det, &mix, 0, 7, 0.0).is_err());
    }

    #[test]
    fn sampler_isotropic_large_n() {
        let sys = system(2);
        let det = Detector::new(&sys).unwrap();
        let s = cos2theta_2d_sampled(&det, &isotropic(&sys), 1_000_000, 3, 0.0).unwrap();
        assert!((s.value - 0.5).abs() < 3.0 * s.stderr, "{s:?}");
        assert_eq!(s.bound_violations, 0);
    }

    #[test]
    fn sampler_is_unbiased_over_seeds() {
        let sys = system(6);
        let det = Detector::new(&sys).unwrap();
        let mix = Mixture::pure_state(random_state(&sys, &[0.9, 2.3, 0.4]));
        let exact = cos2theta_2d_exact(&det, &mix);
        let runs: Vec<SampledValue> =
            (0..100).map(|s| cos2theta_2d_sampled(&det, &mix, 2000, s, 0.0).unwrap()).collect();
        let mean = runs.iter().map(|r| r.value).sum::<f64>() / 100.0;
        let se = runs.iter().map(|r| r.stderr).sum::<f64>() / 100.0;
        assert!((mean - exact).abs() < 4.0 * se / 10.0, "{mean} vs {exact}");
    }

    fn rotate_about_z(sys: &RotorSystem, v: &DVector<Complex64>, angle: f64) -> DVector<Complex64> {
        DVector::from_iterator(
            v.len(),
            v.iter().zip(sys.basis().states()).map(|(c, s)| c * Complex64::from_polar(1.0, -s.m as f64 * angle)),
        )
    }

    fn reflect(sys: &RotorSystem, v: &DVector<Complex64>, flip_y: bool) -> DVector<Complex64> {
        let b = sys.basis();
        DVector::from_iterator(
            v.len(),
            b.states().iter().map(|s| {
                let c = v[b.index_jm(s.j, -s.m).unwrap()];
                if flip_y && s.m % 2 != 0 {
                    -c
                } else {
                    c
                }
            }),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn symmetry_properties(seed in prop::collection::vec(0.05f64..3.0, 3)) {
            let sys = system(5);
            let det = Detector::new(&sys).unwrap();
            let v = random_state(&sys, &seed);
            let s = det.cos2theta_2d_pure(&v);
            prop_assert!((0.0..=1.0).contains(&s));
            let turned = rotate_about_z(&sys, &v, FRAC_PI_2);
            prop_assert!((det.cos2theta_2d_pure(&turned) - (1.0 - s)).abs() < 1e-8);
            for flip_y in [false, true] {
                let r = reflect(&sys, &v, flip_y);
                prop_assert!((det.cos2theta_2d_pure(&r) - s).abs() < 1e-10);
            }
            let mix = Mixture::pure_state(v);
            let dist = AxisDistribution::from_mixture(&det, &mix);
            prop_assert!(dist.min_density() >= -1e-10);
            prop_assert!((dist.total() - 1.0).abs() < 1e-8);
            prop_assert!((dist.cos2theta_2d() - s).abs() < 1e-10);
        }
    }
}
