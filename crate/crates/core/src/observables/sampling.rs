use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::detector::Detector;
use crate::dynamics::Mixture;
use crate::error::{Error, Result};
use crate::rotor::sphere::LegendreTable;

/// Default ions per delay point.
pub const DEFAULT_N_IONS: usize = 2000;

/// Projected radii below this are treated as landing on the detector
/// center and redrawn.
const MIN_PROJECTED_RADIUS: f64 = 1e-9;
const MAX_ATTEMPTS_PER_ION: usize = 1_000_000;
/// Safety factor on the grid maximum used as the rejection bound.
const GRID_BOUND_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledValue {
    pub value: f64,
    pub stderr: f64,
    pub n_ions: usize,
    /// Draws that exceeded the grid-based rejection bound. Any violation
    /// makes the sampler start over with the rigorous bound.
    pub bound_violations: usize,
}

/// Per-point seed derived from a run seed, so that points can be sampled in
/// any order.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined input
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Emulated ion-counting measurement of `⟨cos²θ₂D⟩`: draws molecular axes
/// from the axis distribution, projects them onto the detector (XY) plane
/// and averages `v_x²/(v_x²+v_y²)`. Axial recoil is perfect, so both
/// fragments of a molecule give the same angle and it is counted once.
/// `min_radius` gates out fragments with a small projected radius
/// (0 disables the gate).
pub fn cos2theta_2d_sampled(
    detector: &Detector,
    mix: &Mixture,
    n_ions: usize,
    seed: u64,
    min_radius: f64,
) -> Result<SampledValue> {
    if n_ions == 0 {
        return Err(Error::InvalidParameter("n_ions must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&min_radius) {
        return Err(Error::InvalidParameter(format!("radius gate must be in [0, 1), got {min_radius}")));
    }
    let comps = components(detector, mix);
    if comps.is_empty() {
        return Err(Error::Sampling("mixture has no weight".into()));
    }
    let total: f64 = comps.iter().map(|c| c.0).sum();
    let mut cumulative = Vec::with_capacity(comps.len());
    let mut acc = 0.0;
    for c in &comps {
        acc += c.0 / total;
        cumulative.push(acc);
    }

    let mut bounds: Vec<Option<(f64, f64)>> = vec![None; comps.len()];
    let mut violations = 0;
    let mut rigorous = false;
    let gate = min_radius.max(MIN_PROJECTED_RADIUS);
    'restart: loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_ions {
            let r: f64 = rng.random();
            let k = cumulative.partition_point(|&c| c < r).min(comps.len() - 1);
            let psi = &comps[k].1;
            let (grid_bound, cs_bound) = *bounds[k].get_or_insert_with(|| component_bounds(detector, psi));
            let bound = if rigorous { cs_bound } else { grid_bound.min(cs_bound) };
            let mut attempts = 0;
            let value = loop {
                attempts += 1;
                if attempts > MAX_ATTEMPTS_PER_ION {
                    return Err(Error::Sampling(format!(
                        "rejection sampling exceeded {MAX_ATTEMPTS_PER_ION} attempts (bound {bound:.3e})"
                    )));
                }
                let z = 2.0 * rng.random::<f64>() - 1.0;
                let phi = TAU * rng.random::<f64>();
                let accept: f64 = rng.random();
                let density = amplitude_at(detector, psi, z, phi).norm_sqr();
                if density > bound * (1.0 + 1e-12) {
                    violations += 1;
                    if rigorous {
                        return Err(Error::Sampling(format!(
                            "density {density:.6e} exceeds the rigorous bound {bound:.6e}"
                        )));
                    }
                    rigorous = true;
                    continue 'restart;
                }
                if accept * bound >= density {
                    continue;
                }
                let s = (1.0 - z * z).max(0.0).sqrt();
                let (vx, vy) = (s * phi.cos(), s * phi.sin());
                let r2 = vx * vx + vy * vy;
                if r2.sqrt() < gate {
                    continue;
                }
                break vx * vx / r2;
            };
            sum += value;
            sum_sq += value * value;
        }
        let n = n_ions as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
        return Ok(SampledValue { value: mean, stderr: (var / n).sqrt(), n_ions, bound_violations: violations });
    }
}

/// Weighted pure components of a mixture (Z-quantized vectors).
fn components(detector: &Detector, mix: &Mixture) -> Vec<(f64, DVector<Complex64>)> {
    let mut out: Vec<(f64, DVector<Complex64>)> = mix
        .pure
        .iter()
        .filter(|(w, v)| *w > 0.0 && v.norm_squared() > 0.0)
        .map(|(w, v)| {
            let n2 = v.norm_squared();
            (w * n2, v / Complex64::new(n2.sqrt(), 0.0))
        })
        .collect();
    for (n, &p) in mix.diagonal.iter().enumerate() {
        if p > 0.0 {
            out.push((p, detector.frame().column(n)));
        }
    }
    out
}

/// `(1.5 × maximum over grid and poles, rigorous bound)` on `|ψ(û)|²`.
/// The grid has no polar nodes, hence the explicit pole values. The rigorous bound
/// follows from Cauchy–Schwarz within each J and the addition theorem:
/// `|Σ_M c_JM Y_JM|² ≤ ‖c_J‖² (2J+1)/4π`.
fn component_bounds(detector: &Detector, psi: &DVector<Complex64>) -> (f64, f64) {
    let grid_max = detector.amplitudes_on_grid(psi).iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    let poles = [1.0, -1.0].map(|z| amplitude_at(detector, psi, z, 0.0).norm_sqr());
    let grid_max = grid_max.max(poles[0]).max(poles[1]);
    let basis = detector.basis();
    let mut per_j = vec![0.0; basis.j_max() as usize + 1];
    for (z, s) in psi.iter().zip(basis.states()) {
        per_j[s.j as usize] += z.norm_sqr();
    }
    let cs: f64 = per_j.iter().enumerate().map(|(j, n2)| (n2 * (2.0 * j as f64 + 1.0) / (4.0 * PI)).sqrt()).sum();
    (GRID_BOUND_MARGIN * grid_max, cs * cs)
}

fn amplitude_at(detector: &Detector, psi: &DVector<Complex64>, z: f64, phi: f64) -> Complex64 {
    let basis = detector.basis();
    let jm = basis.j_max() as i32;
    let table = LegendreTable::new(jm as usize, z);
    let step = Complex64::from_polar(1.0, phi);
    let mut phases = vec![Complex64::new(1.0, 0.0); (2 * jm + 1) as usize];
    for m in 1..=jm {
        let p = phases[(jm + m - 1) as usize] * step;
        phases[(jm + m) as usize] = p;
        phases[(jm - m) as usize] = p.conj();
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, s) in psi.iter().zip(basis.states()) {
        if c.re != 0.0 || c.im != 0.0 {
            acc += c * table.get(s.j as usize, s.m) * phases[(s.m + jm) as usize];
        }
    }
    acc
}
