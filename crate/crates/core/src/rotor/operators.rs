//! Direction-cosine products of the molecular axis û in the |J M⟩ basis.
//!
//! With the Racah tensors `C^2_q` the needed products are
//!
//! ```text
//! u_z²   = 1/3 + 2/3 C⁰
//! u_x²   = 1/3 − 1/3 C⁰ + (C² + C⁻²)/√6
//! u_y²   = 1/3 − 1/3 C⁰ − (C² + C⁻²)/√6
//! u_x u_z = (C⁻¹ − C¹)/√6
//! ```
//!
//! so every element follows from one 3j product.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::Basis;
use super::sphere::{spherical_harmonic, SphereGrid};
use super::wigner::ck_element;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleKind {
    Xx,
    Yy,
    Zz,
    Xz,
}

impl AngleKind {
    pub const ALL: [AngleKind; 4] = [AngleKind::Xx, AngleKind::Yy, AngleKind::Zz, AngleKind::Xz];

    /// The function of û this operator represents.
    pub fn eval(self, u: [f64; 3]) -> f64 {
        match self {
            AngleKind::Xx => u[0] * u[0],
            AngleKind::Yy => u[1] * u[1],
            AngleKind::Zz => u[2] * u[2],
            AngleKind::Xz => u[0] * u[2],
        }
    }
}

/// Single matrix element `⟨J' M'| f_kind(û) |J M⟩` from 3j symbols.
pub fn angle_element(kind: AngleKind, jp: u32, mp: i32, j: u32, m: i32) -> f64 {
    let (jp, j) = (jp as i32, j as i32);
    let c = |q: i32| ck_element(jp, mp, 2, q, j, m);
    let diag = if jp == j && mp == m { 1.0 / 3.0 } else { 0.0 };
    let inv_sqrt6 = 1.0 / 6f64.sqrt();
    match kind {
        AngleKind::Zz => diag + 2.0 / 3.0 * c(0),
        AngleKind::Xx => diag - c(0) / 3.0 + (c(2) + c(-2)) * inv_sqrt6,
        AngleKind::Yy => diag - c(0) / 3.0 - (c(2) + c(-2)) * inv_sqrt6,
        AngleKind::Xz => (c(-1) - c(1)) * inv_sqrt6,
    }
}

/// Dense real-symmetric matrix of `f_kind(û)` over a linear-rotor basis.
pub fn angle_operator(kind: AngleKind, basis: &Basis) -> Result<DMatrix<f64>> {
    basis.require_linear()?;
    let n = basis.len();
    let mut a = DMatrix::zeros(n, n);
    for (c, s) in basis.states().iter().enumerate() {
        for dj in [-2i32, 0, 2] {
            let jp = s.j as i32 + dj;
            if jp < 0 || jp as u32 > basis.j_max() {
                continue;
            }
            for dm in -2i32..=2 {
                let mp = s.m + dm;
                if mp.abs() > jp {
                    continue;
                }
                let v = angle_element(kind, jp as u32, mp, s.j, s.m);
                if v != 0.0 {
                    let r = basis.index_jm(jp as u32, mp).expect("state in basis");
                    a[(r, c)] = v;
                }
            }
        }
    }
    Ok(a)
}

/// `J_Y` (lab Y component of the rotational angular momentum) over a
/// linear-rotor basis; Hermitian and purely imaginary.
pub fn jy_operator(basis: &Basis) -> Result<DMatrix<Complex64>> {
    basis.require_linear()?;
    let n = basis.len();
    let mut a = DMatrix::zeros(n, n);
    for (c, s) in basis.states().iter().enumerate() {
        if s.m < s.j as i32 {
            let jf = s.j as f64;
            let mf = s.m as f64;
            let raise = (jf * (jf + 1.0) - mf * (mf + 1.0)).sqrt();
            let r = basis.index_jm(s.j, s.m + 1).expect("state in basis");
            // J_y = (J₊ − J₋) / 2i
            a[(r, c)] = Complex64::new(0.0, -0.5 * raise);
            a[(c, r)] = Complex64::new(0.0, 0.5 * raise);
        }
    }
    Ok(a)
}

/// Spherical quadrature of `conj(Y_{J'M'}) f_kind Y_{JM}`; independent of
/// the 3j route. The grid is large enough to integrate the (polynomial)
/// integrand exactly.
pub fn quadrature_oracle(kind: AngleKind, jp: u32, mp: i32, j: u32, m: i32) -> f64 {
    let lsum = (jp + j) as usize;
    let grid = SphereGrid::new(lsum / 2 + 4, 2 * lsum + 8);
    let wphi = grid.phi_weight();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&z, &wt) in grid.cos_theta.iter().zip(&grid.theta_weights) {
        let theta = z.acos();
        let s = (1.0 - z * z).sqrt();
        for &p in &grid.phi {
            let u = [s * p.cos(), s * p.sin(), z];
            let yp = spherical_harmonic(jp as usize, mp, theta, p);
            let y = spherical_harmonic(j as usize, m, theta, p);
            acc += wt * wphi * yp.conj() * kind.eval(u) * y;
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_and_quadrupole_elements() {
        let b = Basis::linear_rotor(4);
        let zz = angle_operator(AngleKind::Zz, &b).unwrap();
        assert!((zz[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        let i20 = b.index_jm(2, 0).unwrap();
        assert!((zz[(i20, 0)] - 2.0 / (3.0 * 5f64.sqrt())).abs() < 1e-14);
        assert!((zz[(i20, 0)] - 0.298_142_4).abs() < 1e-7);
    }

    #[test]
    fn completeness_and_symmetry() {
        let b = Basis::linear_rotor(8);
        let ops: Vec<_> =
            [AngleKind::Xx, AngleKind::Yy, AngleKind::Zz].iter().map(|&k| angle_operator(k, &b).unwrap()).collect();
        let sum = &ops[0] + &ops[1] + &ops[2];
        let id = DMatrix::<f64>::identity(b.len(), b.len());
        assert!((sum - id).abs().max() < 1e-12);
        for k in AngleKind::ALL {
            let a = angle_operator(k, &b).unwrap();
            assert!((&a - a.transpose()).abs().max() < 1e-14);
        }
    }

    #[test]
    fn selection_rules() {
        let b = Basis::linear_rotor(6);
        let allowed = |kind: AngleKind, dm: i32| match kind {
            AngleKind::Zz => dm == 0,
            AngleKind::Xz => dm.abs() == 1,
            AngleKind::Xx | AngleKind::Yy => dm == 0 || dm.abs() == 2,
        };
        for kind in AngleKind::ALL {
            let a = angle_operator(kind, &b).unwrap();
            for (r, sr) in b.states().iter().enumerate() {
                for (c, sc) in b.states().iter().enumerate() {
                    if a[(r, c)].abs() > 1e-15 {
                        let dj = sr.j as i32 - sc.j as i32;
                        assert!([-2, 0, 2].contains(&dj), "{kind:?} {sr:?} {sc:?}");
                        assert!(allowed(kind, sr.m - sc.m), "{kind:?} {sr:?} {sc:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_spot_checks() {
        assert!((quadrature_oracle(AngleKind::Zz, 0, 0, 0, 0) - 1.0 / 3.0).abs() < 1e-10);
        assert!((quadrature_oracle(AngleKind::Zz, 2, 0, 0, 0) - 0.298_142_4).abs() < 1e-8);
        let b = Basis::linear_rotor(2);
        let xz = angle_operator(AngleKind::Xz, &b).unwrap();
        let r = b.index_jm(1, 1).unwrap();
        // ΔJ = 1 is forbidden: both routes must give zero.
        assert!((quadrature_oracle(AngleKind::Xz, 1, 1, 0, 0) - xz[(r, 0)]).abs() < 1e-8);
        let r = b.index_jm(2, 1).unwrap();
        assert!((quadrature_oracle(AngleKind::Xz, 2, 1, 0, 0) - xz[(r, 0)]).abs() < 1e-8);
        assert!(xz[(r, 0)].abs() > 0.1);
    }

    #[test]
    fn jy_spectrum() {
        let b = Basis::linear_rotor(4);
        let jy = jy_operator(&b).unwrap();
        assert!((&jy - jy.adjoint()).iter().all(|z| z.norm() < 1e-15));
        for j in 0..=4u32 {
            let start = (j * j) as usize;
            let n = (2 * j + 1) as usize;
            let block = jy.view((start, start), (n, n)).into_owned();
            let mut ev: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            for (e, m) in ev.iter().zip(-(j as i32)..=j as i32) {
                assert!((e - m as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_mode() {
        assert!(angle_operator(AngleKind::Zz, &Basis::symmetric_top(2)).is_err());
    }
}
