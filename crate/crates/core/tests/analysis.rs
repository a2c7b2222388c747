use std::f64::consts::TAU;

use centrifuge::analysis::*;
use centrifuge::observables::AlignmentTrace;
use centrifuge::rotor::{resonance_frequency, RotorParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn damped(t: f64, f: f64) -> f64 {
    0.5 + 0.05 * (-t / 300.0).exp() * (TAU * f * t * 1e-3 + 0.3).cos()
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

fn noisy(t: &[f64], f: impl Fn(f64) -> f64, sigma: f64, seed: u64) -> AlignmentTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let values = t.iter().map(|&x| f(x) + noise.sample(&mut rng)).collect();
    AlignmentTrace::new(t.to_vec(), values, vec![sigma; t.len()], "synthetic").unwrap()
}

fn exact(t: &[f64], f: impl Fn(f64) -> f64) -> AlignmentTrace {
    AlignmentTrace::new(t.to_vec(), t.iter().map(|&x| f(x)).collect(), vec![0.0; t.len()], "synthetic").unwrap()
}

#[test]
fn noiseless_damped_cosine_is_recovered() {
    let t = grid(0.0, 400.0, 2.0);
    let out = fit_decaying_sinusoid(&exact(&t, |x| damped(x, 17.0))).unwrap();
    let fit = out.fit().expect("oscillation");
    assert!((fit.frequency_ghz - 17.0).abs() < 1e-6, "{}", fit.frequency_ghz);
    assert!((fit.damping_time() - 300.0).abs() < 1e-4);
    assert!((fit.amplitude - 0.05).abs() < 1e-9);
    assert!((fit.phase - 0.3).abs() < 1e-7);
}

#[test]
fn sinusoid_confidence_interval_covers_truth() {
    let t = grid(0.0, 400.0, 2.0);
    let hits = (0..100)
        .filter(|&seed| {
            let out = fit_decaying_sinusoid(&noisy(&t, |x| damped(x, 17.0), 0.01, seed)).unwrap();
            let fit = out.fit().expect("oscillation");
            (fit.frequency_ghz - 17.0).abs() <= 3.0 * fit.frequency_err()
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn sinusoid_fit_is_translation_invariant() {
    let t = grid(0.0, 400.0, 2.0);
    let a = noisy(&t, |x| damped(x, 13.0), 0.01, 5);
    let mut b = a.clone();
    b.delays.iter_mut().for_each(|d| *d += 137.5);
    let fa = fit_decaying_sinusoid(&a).unwrap().fit().cloned().unwrap();
    let fb = fit_decaying_sinusoid(&b).unwrap().fit().cloned().unwrap();
    for (x, y) in [
        (fa.frequency_ghz, fb.frequency_ghz),
        (fa.amplitude, fb.amplitude),
        (fa.damping_rate, fb.damping_rate),
        (fa.offset, fb.offset),
        (fa.phase, fb.phase),
    ] {
        assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn flat_noise_reports_no_oscillation() {
    let t = grid(0.0, 400.0, 2.0);
    let out = fit_decaying_sinusoid(&noisy(&t, |_| 0.5, 0.01, 11)).unwrap();
    assert!(matches!(out, SinusoidOutcome::NoOscillation { .. }), "{out:?}");
    let out = fit_decaying_sinusoid(&exact(&t, |_| 0.5)).unwrap();
    assert!(out.fit().is_none());
}

#[test]
fn equal_spectral_peaks_pick_the_lower_frequency() {
    let t = grid(0.0, 1000.0, 2.0);
    let tr = exact(&t, |x| 0.5 + 0.05 * (TAU * 10.0 * x * 1e-3).cos() + 0.05 * (TAU * 30.0 * x * 1e-3).cos());
    let fit = fit_decaying_sinusoid(&tr).unwrap().fit().cloned().unwrap();
    assert!((fit.frequency_ghz - 10.0).abs() < 0.1, "{}", fit.frequency_ghz);
}

#[test]
fn noiseless_decay_is_recovered() {
    let t = grid(500.0, 3300.0, 25.0);
    let fit = fit_exponential_decay(&exact(&t, |x| 0.5 + 0.02 * (-x / 3200.0).exp()), 0.5).unwrap();
    assert!(fit.resolvable);
    assert!(((fit.tau - 3200.0) / 3200.0).abs() < 1e-8, "{}", fit.tau);
    assert!(((fit.amplitude - 0.02) / 0.02).abs() < 1e-8);
}

#[test]
fn flat_decay_trace_is_unresolvable() {
    let t = grid(500.0, 3300.0, 25.0);
    let fit = fit_exponential_decay(&exact(&t, |_| 0.5), 0.5).unwrap();
    assert!(!fit.resolvable);
    assert_eq!(fit.amplitude, 0.0);

    let fit = fit_exponential_decay(&noisy(&t, |_| 0.5, 0.005, 2), 0.5).unwrap();
    assert!(!fit.resolvable, "{fit:?}");
    assert!(fit.amplitude.abs() <= 3.0 * fit.amplitude_err(), "{fit:?}");
}

#[test]
fn decay_errors_shrink_as_inverse_sqrt_n() {
    let truth = |x: f64| 0.5 + 0.05 * (-x / 1500.0).exp();
    let err = |n: usize| {
        let t = grid(500.0, 3300.0, 2800.0 / (200 * n) as f64);
        fit_exponential_decay(&noisy(&t, truth, 0.005, 40 + n as u64), 0.5).unwrap().tau_err()
    };
    let e1 = err(1);
    for n in [4usize, 16] {
        let ratio = err(n) * (n as f64).sqrt() / e1;
        assert!((ratio - 1.0).abs() < 0.2, "n={n}: {ratio}");
    }
}

fn gaussian_scan(center: f64, width: f64) -> ScanCurve {
    let f = grid(4.0, 14.0, 0.5);
    let v = f.iter().map(|&x| 0.5 + 0.1 * (-4.0 * 2f64.ln() * ((x - center) / width).powi(2)).exp()).collect();
    ScanCurve::new(f.clone(), v, vec![0.0; f.len()]).unwrap()
}

#[test]
fn symmetric_gaussian_peak_center_is_exact() {
    let fit = fit_resonance_peak(&gaussian_scan(8.27, 2.5), PeakModel::Gaussian).unwrap();
    assert!((fit.center - 8.27).abs() < 1e-9, "{}", fit.center);
    assert!((fit.width - 2.5).abs() < 1e-8);
    let lor = fit_resonance_peak(&gaussian_scan(9.0, 2.0), PeakModel::Lorentzian).unwrap();
    assert!((lor.center - 9.0).abs() < 1e-6, "{}", lor.center);
}

#[test]
fn edge_maximum_is_unbracketed() {
    let err = fit_resonance_peak(&gaussian_scan(16.0, 3.0), PeakModel::Gaussian).unwrap_err();
    assert!(matches!(err, centrifuge::Error::Unbracketed(f) if f == 14.0), "{err}");
}

#[test]
fn extract_byz_inverts_resonance_frequency() {
    let p = RotorParams::no_dimer_droplet().with_d(0.0);
    let b = extract_byz(resonance_frequency(0, &p), 0).unwrap();
    assert!((b / p.b_yz() - 1.0).abs() < 1e-12);
    assert!((extract_byz(8.4, 0).unwrap() - 0.0934).abs() < 5e-5);
    assert!((extract_byz(15.29, 0).unwrap() - 0.17).abs() < 5e-5);
    assert!(extract_byz(0.0, 0).is_err());
}
