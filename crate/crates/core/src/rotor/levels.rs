use nalgebra::DMatrix;

use super::params::RotorParams;
use crate::error::{Error, Result};
use crate::units::{wavenumber_to_ghz, C_GHZ_PER_WAVENUMBER};

/// Near-prolate energy `B_yz J(J+1) + (B_x − B_yz) K² − D [J(J+1)]²`, cm⁻¹.
pub fn prolate_energy(j: u32, k: i32, params: &RotorParams) -> Result<f64> {
    if k.unsigned_abs() > j {
        return Err(Error::InvalidQuantumNumbers { j: j as i64, k: k as i64, m: 0 });
    }
    let jj = (j * (j + 1)) as f64;
    let byz = params.b_yz();
    Ok(byz * jj + (params.b_x - byz) * (k * k) as f64 - params.d * jj * jj)
}

/// `E(J, 0)` without validation; used by the K ≡ 0 dynamics.
pub(crate) fn linear_energy(j: u32, params: &RotorParams) -> f64 {
    let jj = (j * (j + 1)) as f64;
    params.b_yz() * jj - params.d * jj * jj
}

/// Rigid asymmetric-top levels for one J, ascending, cm⁻¹.
///
/// The Hamiltonian `A J_a² + B J_b² + C J_c²` (A = B_x, B = B_y, C = B_z) is
/// built in the prolate symmetric-top basis |J K⟩ and diagonalized.
/// Centrifugal distortion is not included.
pub fn asymmetric_levels(j: u32, params: &RotorParams) -> Vec<f64> {
    let jj = j as i32;
    let n = (2 * j + 1) as usize;
    let (a, b, c) = (params.b_x, params.b_y, params.b_z);
    let jf = (j * (j + 1)) as f64;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, k) in (-jj..=jj).enumerate() {
        let kf = k as f64;
        h[(i, i)] = 0.5 * (b + c) * (jf - kf * kf) + a * kf * kf;
        if k + 2 <= jj {
            let f1 = jf - kf * (kf + 1.0);
            let f2 = jf - (kf + 1.0) * (kf + 2.0);
            let v = 0.25 * (b - c) * (f1 * f2).sqrt();
            h[(i, i + 2)] = v;
            h[(i + 2, i)] = v;
        }
    }
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Centrifuge frequency, GHz, of the two-photon J → J+2 (K = 0) resonance:
/// `2 f_CFG = ΔE / h`.
pub fn resonance_frequency(j: u32, params: &RotorParams) -> f64 {
    let de = linear_energy(j + 2, params) - linear_energy(j, params);
    0.5 * wavenumber_to_ghz(de)
}

/// Rigid-rotor inverse of [`resonance_frequency`]: `B_yz = 2 f / ((4J+6) c)`.
pub fn extract_byz(f_peak_ghz: f64, j: u32) -> Result<f64> {
    if !(f_peak_ghz > 0.0) {
        return Err(Error::InvalidParameter(format!("peak frequency must be > 0, got {f_peak_ghz}")));
    }
    Ok(2.0 * f_peak_ghz / ((4 * j + 6) as f64 * C_GHZ_PER_WAVENUMBER))
}

/// Distortion-aware inverse: solves `2f/c = B·a − D·b` for B given D, where
/// `a = (J+2)(J+3) − J(J+1)` and `b` the matching quartic difference.
pub fn extract_byz_with_distortion(f_peak_ghz: f64, j: u32, d: f64) -> Result<f64> {
    if !(f_peak_ghz > 0.0) {
        return Err(Error::InvalidParameter(format!("peak frequency must be > 0, got {f_peak_ghz}")));
    }
    let lo = (j * (j + 1)) as f64;
    let hi = ((j + 2) * (j + 3)) as f64;
    let a = hi - lo;
    let b = hi * hi - lo * lo;
    Ok((2.0 * f_peak_ghz / C_GHZ_PER_WAVENUMBER + d * b) / a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rigid(p: RotorParams) -> RotorParams {
        p.with_d(0.0)
    }

    #[test]
    fn prolate_examples() {
        let gas = RotorParams::no_dimer_gas();
        assert_eq!(prolate_energy(0, 0, &gas).unwrap(), 0.0);
        assert!((prolate_energy(2, 0, &rigid(gas)).unwrap() - 1.02).abs() < 1e-14);
        assert!((prolate_energy(2, 0, &gas).unwrap() - 1.019_964).abs() < 1e-14);
        assert!((prolate_energy(1, 1, &rigid(gas)).unwrap() - 1.03).abs() < 1e-14);
        assert!(prolate_energy(1, 2, &gas).is_err());
    }

    #[test]
    fn asymmetric_j1_triplet() {
        let gas = RotorParams::no_dimer_gas();
        assert_eq!(asymmetric_levels(0, &gas), vec![0.0]);
        let l = asymmetric_levels(1, &gas);
        for (got, want) in l.iter().zip([0.34, 1.01, 1.05]) {
            assert!((got - want).abs() < 1e-14, "{l:?}");
        }
    }

    #[test]
    fn symmetric_limit_matches_prolate() {
        let p = RotorParams::no_dimer_droplet().with_d(0.0);
        for j in 0..=10u32 {
            let mut want: Vec<f64> = (-(j as i32)..=j as i32).map(|k| prolate_energy(j, k, &p).unwrap()).collect();
            want.sort_by(f64::total_cmp);
            let got = asymmetric_levels(j, &p);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "J={j}");
            }
        }
    }

    #[test]
    fn resonance_examples() {
        let gas = RotorParams::no_dimer_gas();
        assert!((resonance_frequency(0, &gas) - 15.29).abs() < 0.01);
        assert!((resonance_frequency(1, &gas) - 25.48).abs() < 0.01);
        let drop = RotorParams::no_dimer_droplet();
        assert!((resonance_frequency(0, &drop) - 8.27).abs() < 0.01);
        let r = rigid(drop);
        for j in 0..6 {
            let expect = (2 * j + 3) as f64 * r.b_yz() * C_GHZ_PER_WAVENUMBER;
            assert!((resonance_frequency(j, &r) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn resonance_increases_with_j() {
        let p = RotorParams::no_dimer_droplet();
        let f: Vec<f64> = (0..16).map(|j| resonance_frequency(j, &p)).collect();
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn extraction_round_trip() {
        let p = RotorParams::no_dimer_droplet().with_d(0.0);
        let b = extract_byz(resonance_frequency(0, &p), 0).unwrap();
        assert!((b - p.b_yz()).abs() < 1e-12 * p.b_yz());
        assert!((extract_byz(8.4, 0).unwrap() - 0.0934).abs() < 1e-4);
        assert!((extract_byz(15.29, 0).unwrap() - 0.17).abs() < 1e-4);
        assert!(extract_byz(0.0, 0).is_err());

        let pd = RotorParams::no_dimer_droplet();
        for j in 0..4 {
            let f = resonance_frequency(j, &pd);
            let b = extract_byz_with_distortion(f, j, pd.d).unwrap();
            assert!((b - pd.b_yz()).abs() < 1e-12);
        }
    }
}
