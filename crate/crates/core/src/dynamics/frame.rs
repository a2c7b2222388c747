//! Joint eigenbasis of H0 and J_Y: |J, m⟩ quantized along the centrifuge
//! propagation axis. Rotations of the polarization about Y are diagonal
//! here, and field-free relaxation is defined in this basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::rotor::{Basis, BasisState};

#[derive(Debug, Clone)]
pub struct FieldFreeFrame {
    /// Per-J unitary whose columns are J_Y eigenvectors, m ascending.
    blocks: Vec<DMatrix<Complex64>>,
    offsets: Vec<usize>,
}

impl FieldFreeFrame {
    pub fn new(basis: &Basis) -> Result<Self> {
        basis.require_linear()?;
        let mut blocks = Vec::new();
        let mut offsets = Vec::new();
        for j in 0..=basis.j_max() {
            offsets.push((j * j) as usize);
            blocks.push(jy_eigenvectors(j));
        }
        Ok(Self { blocks, offsets })
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    /// J_Y eigenvalue m of frame state `n` (same index layout as the basis).
    pub fn m_of(&self, n: usize) -> i32 {
        let j = (n as f64).sqrt().floor() as usize;
        n as i32 - (j * j) as i32 - j as i32
    }

    /// Frame state n as `(J, m_Y)`.
    pub fn label(&self, n: usize) -> BasisState {
        let j = (n as f64).sqrt().floor() as u32;
        BasisState { j, k: 0, m: self.m_of(n) }
    }

    /// Coefficients in the frame: `Q† ψ`.
    pub fn to_frame(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.apply_blocks(psi, true)
    }

    /// Back to the Z-quantized basis: `Q ψ`.
    pub fn from_frame(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.apply_blocks(psi, false)
    }

    /// Z-basis vector of frame state n.
    pub fn column(&self, n: usize) -> DVector<Complex64> {
        let mut e = DVector::zeros(self.dim());
        e[n] = Complex64::new(1.0, 0.0);
        self.from_frame(&e)
    }

    /// `exp(i φ J_Y) ψ`, which carries the polarization direction X into
    /// (cos φ, 0, sin φ).
    pub fn rotate(&self, psi: &DVector<Complex64>, phi: f64) -> DVector<Complex64> {
        let mut y = self.to_frame(psi);
        for (n, z) in y.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, phi * self.m_of(n) as f64);
        }
        self.from_frame(&y)
    }

    /// `Q† ρ Q`.
    pub fn matrix_to_frame(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let q = self.dense_q();
        q.adjoint() * rho * q
    }

    /// `Q ρ Q†`.
    pub fn matrix_from_frame(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let q = self.dense_q();
        &q * rho * q.adjoint()
    }

    pub fn dense_q(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut q = DMatrix::zeros(n, n);
        for (b, &o) in self.blocks.iter().zip(&self.offsets) {
            q.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
        }
        q
    }

    fn apply_blocks(&self, psi: &DVector<Complex64>, adjoint: bool) -> DVector<Complex64> {
        let mut out = DVector::zeros(psi.len());
        for (b, &o) in self.blocks.iter().zip(&self.offsets) {
            let d = b.nrows();
            if o + d > psi.len() {
                break;
            }
            let seg = psi.rows(o, d);
            if seg.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let r = if adjoint { b.adjoint() * seg } else { b * seg };
            out.rows_mut(o, d).copy_from(&r);
        }
        out
    }
}

/// Eigenvectors of J_y within one J manifold, columns ordered m = −J..J,
/// phases fixed so the largest-magnitude component is real and positive.
fn jy_eigenvectors(j: u32) -> DMatrix<Complex64> {
    let d = (2 * j + 1) as usize;
    let jf = j as f64;
    let mut a = DMatrix::<Complex64>::zeros(d, d);
    for c in 0..d - 1 {
        let m = c as f64 - jf;
        let raise = (jf * (jf + 1.0) - m * (m + 1.0)).sqrt();
        a[(c + 1, c)] = Complex64::new(0.0, -0.5 * raise);
        a[(c, c + 1)] = Complex64::new(0.0, 0.5 * raise);
    }
    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut q = DMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let (pivot, _) =
            v.iter()
                .enumerate()
                .fold((0, -1.0), |acc, (r, z)| if z.norm() > acc.1 + 1e-12 { (r, z.norm()) } else { acc });
        let ph = v[pivot].conj() / v[pivot].norm();
        v *= ph;
        v /= Complex64::new(v.norm(), 0.0);
        q.set_column(k, &v);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{angle_operator, jy_operator, AngleKind};

    #[test]
    fn frame_diagonalizes_jy() {
        let b = Basis::linear_rotor(6);
        let f = FieldFreeFrame::new(&b).unwrap();
        let jy = jy_operator(&b).unwrap();
        let d = f.matrix_to_frame(&jy);
        for r in 0..b.len() {
            for c in 0..b.len() {
                let want = if r == c { f.m_of(r) as f64 } else { 0.0 };
                assert!((d[(r, c)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        let q = f.dense_q();
        let id = DMatrix::<Complex64>::identity(b.len(), b.len());
        assert!((q.adjoint() * &q - id).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn rotation_carries_x_alignment_into_the_field_direction() {
        let b = Basis::linear_rotor(5);
        let f = FieldFreeFrame::new(&b).unwrap();
        let to_c = |m: &DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
        let xx = to_c(&angle_operator(AngleKind::Xx, &b).unwrap());
        let zz = to_c(&angle_operator(AngleKind::Zz, &b).unwrap());
        let xz = to_c(&angle_operator(AngleKind::Xz, &b).unwrap());
        let phi: f64 = 0.83;
        let (s, c) = phi.sin_cos();
        let want = &xx * Complex64::new(c * c, 0.0)
            + &zz * Complex64::new(s * s, 0.0)
            + &xz * Complex64::new(2.0 * s * c, 0.0);
        // U(φ) XX U(φ)† column by column
        let n = b.len();
        let mut got = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = Complex64::new(1.0, 0.0);
            let back = f.rotate(&e, -phi);
            let col = f.rotate(&(&xx * back), phi);
            got.set_column(k, &col);
        }
        assert!((got - want).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn labels() {
        let b = Basis::linear_rotor(3);
        let f = FieldFreeFrame::new(&b).unwrap();
        for (n, s) in b.states().iter().enumerate() {
            assert_eq!(f.label(n).j, s.j);
            assert_eq!(f.m_of(n), s.m);
        }
    }
}
