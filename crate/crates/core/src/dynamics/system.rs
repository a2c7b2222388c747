use nalgebra::DVector;
use num_complex::Complex64;

use super::frame::FieldFreeFrame;
use crate::error::{Error, Result};
use crate::field::{coupling_depth, FieldWaveform};
use crate::rotor::{angle_element, linear_energy, AngleKind, Basis, RotorParams};
use crate::units::RAD_PER_PS_PER_WAVENUMBER;

/// Sparse generator restricted to one dynamically closed sector of the
/// basis. Stored as CSR with one value array per operator so the
/// time-dependent combination can be assembled in a single pass.
#[derive(Debug, Clone)]
pub(crate) struct SectorOperator {
    /// Full-basis indices of the sector, ascending.
    pub indices: Vec<usize>,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    xx: Vec<f64>,
    zz: Vec<f64>,
    xz: Vec<f64>,
    /// `J_Y = i · jy_im` entrywise.
    jy_im: Vec<f64>,
    /// Diagonal field-free energies, rad/ps.
    omega: Vec<f64>,
    diag_pos: Vec<usize>,
    row_abs_xx_zz_xz: Vec<f64>,
    row_abs_jy: Vec<f64>,
}

/// Coefficients of one generator evaluation, all in rad/ps:
/// `K = w_h0·diag(ω) + a_xx·XX + a_zz·ZZ + a_xz·XZ + w_jy·J_Y`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct GeneratorCoeffs {
    pub w_h0: f64,
    pub a_xx: f64,
    pub a_zz: f64,
    pub a_xz: f64,
    pub w_jy: f64,
}

impl GeneratorCoeffs {
    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        Self {
            w_h0: alpha * self.w_h0 + beta * other.w_h0,
            a_xx: alpha * self.a_xx + beta * other.a_xx,
            a_zz: alpha * self.a_zz + beta * other.a_zz,
            a_xz: alpha * self.a_xz + beta * other.a_xz,
            w_jy: alpha * self.w_jy + beta * other.w_jy,
        }
    }
}

impl SectorOperator {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// Gershgorin bound on ‖K‖ for the given coefficients.
    pub fn norm_bound(&self, c: &GeneratorCoeffs) -> f64 {
        let a = c.a_xx.abs().max(c.a_zz.abs()).max(c.a_xz.abs());
        (0..self.len())
            .map(|r| {
                c.w_h0.abs() * self.omega[r].abs() + a * self.row_abs_xx_zz_xz[r] + c.w_jy.abs() * self.row_abs_jy[r]
            })
            .fold(0.0, f64::max)
    }

    /// Fills `vals` with the real part of K for these coefficients.
    pub fn assemble(&self, c: &GeneratorCoeffs, vals: &mut Vec<f64>) {
        vals.clear();
        vals.extend(
            self.xx.iter().zip(&self.zz).zip(&self.xz).map(|((x, z), xz)| c.a_xx * x + c.a_zz * z + c.a_xz * xz),
        );
        for (r, &p) in self.diag_pos.iter().enumerate() {
            vals[p] += c.w_h0 * self.omega[r];
        }
    }

    /// `out = K x` with K = vals + i·w_jy·jy_im.
    pub fn apply(&self, vals: &[f64], w_jy: f64, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out[..self.len()].iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = x[self.col[p]];
                let a = vals[p];
                let b = w_jy * self.jy_im[p];
                re += a * v.re - b * v.im;
                im += a * v.im + b * v.re;
            }
            *o = Complex64::new(re, im);
        }
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
}

/// Precomputed rotor Hamiltonian pieces over a linear-rotor basis.
#[derive(Debug, Clone)]
pub struct RotorSystem {
    basis: Basis,
    params: RotorParams,
    energies: Vec<f64>,
    sectors: Vec<SectorOperator>,
    sector_of: Vec<usize>,
    frame: FieldFreeFrame,
}

impl RotorSystem {
    pub fn new(basis: Basis, params: RotorParams) -> Result<Self> {
        basis.require_linear()?;
        params.validate()?;
        let energies: Vec<f64> = basis.states().iter().map(|s| linear_energy(s.j, &params)).collect();
        let frame = FieldFreeFrame::new(&basis)?;

        // The field couples ΔJ = 0, ±2 and J_Y keeps J, so J parity splits
        // the basis into two closed sectors.
        let mut sector_of = vec![0; basis.len()];
        let mut members: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, s) in basis.states().iter().enumerate() {
            let p = (s.j % 2) as usize;
            sector_of[i] = p;
            members[p].push(i);
        }
        let mut sectors = Vec::new();
        for idx in members {
            sectors.push(build_sector(&basis, &energies, idx));
        }
        Ok(Self { basis, params, energies, sectors, sector_of, frame })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn params(&self) -> &RotorParams {
        &self.params
    }

    /// Field-free energies per basis state, cm⁻¹.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn frame(&self) -> &FieldFreeFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Peak coupling depth U0 (cm⁻¹) for a waveform.
    pub fn peak_depth(&self, field: &FieldWaveform) -> f64 {
        coupling_depth(field.envelope.peak_intensity, self.params.delta_alpha)
    }

    pub(crate) fn sectors(&self) -> &[SectorOperator] {
        &self.sectors
    }

    /// Sectors touched by a state's support.
    pub(crate) fn sectors_for(&self, psi: &DVector<Complex64>) -> Vec<usize> {
        let mut used = vec![false; self.sectors.len()];
        for (i, z) in psi.iter().enumerate() {
            if z.norm_sqr() > 0.0 {
                used[self.sector_of[i]] = true;
            }
        }
        (0..self.sectors.len()).filter(|&s| used[s]).collect()
    }

    /// `⟨ψ|H0|ψ⟩` in cm⁻¹.
    pub fn mean_energy(&self, psi: &DVector<Complex64>) -> f64 {
        psi.iter().zip(&self.energies).map(|(z, e)| z.norm_sqr() * e).sum()
    }
}

fn build_sector(basis: &Basis, energies: &[f64], indices: Vec<usize>) -> SectorOperator {
    let n = indices.len();
    let mut local = vec![usize::MAX; basis.len()];
    for (k, &i) in indices.iter().enumerate() {
        local[i] = k;
    }
    let mut row_ptr = vec![0];
    let (mut col, mut xx, mut zz, mut xz, mut jy_im) = (vec![], vec![], vec![], vec![], vec![]);
    let mut diag_pos = vec![0; n];
    let mut row_abs_xx_zz_xz = vec![0.0; n];
    let mut row_abs_jy = vec![0.0; n];
    for (r, &gi) in indices.iter().enumerate() {
        let s = basis.state(gi);
        let mut entries: Vec<(usize, f64, f64, f64, f64)> = Vec::new();
        for dj in [-2i32, 0, 2] {
            let jc = s.j as i32 + dj;
            if jc < 0 || jc as u32 > basis.j_max() {
                continue;
            }
            for dm in -2i32..=2 {
                let mc = s.m + dm;
                if mc.abs() > jc {
                    continue;
                }
                let gc = basis.index_jm(jc as u32, mc).expect("state in basis");
                let c = local[gc];
                let vxx = angle_element(AngleKind::Xx, s.j, s.m, jc as u32, mc);
                let vzz = angle_element(AngleKind::Zz, s.j, s.m, jc as u32, mc);
                let vxz = angle_element(AngleKind::Xz, s.j, s.m, jc as u32, mc);
                let vjy = if dj == 0 && dm.abs() == 1 {
                    // ⟨M|J_y|M'⟩ with M' = M ± 1 is ±(i/2)√(J(J+1) − M'(M' ∓ 1))
                    let jf = s.j as f64;
                    let mf = mc as f64;
                    let lad = (jf * (jf + 1.0) - mf * (mf - dm as f64)).sqrt();
                    if dm == 1 {
                        0.5 * lad
                    } else {
                        -0.5 * lad
                    }
                } else {
                    0.0
                };
                if vxx != 0.0 || vzz != 0.0 || vxz != 0.0 || vjy != 0.0 || c == r {
                    entries.push((c, vxx, vzz, vxz, vjy));
                }
            }
        }
        entries.sort_by_key(|e| e.0);
        for (c, vxx, vzz, vxz, vjy) in entries {
            if c == r {
                diag_pos[r] = col.len();
            }
            col.push(c);
            xx.push(vxx);
            zz.push(vzz);
            xz.push(vxz);
            jy_im.push(vjy);
            row_abs_xx_zz_xz[r] += vxx.abs() + vzz.abs() + 2.0 * vxz.abs();
            row_abs_jy[r] += vjy.abs();
        }
        row_ptr.push(col.len());
    }
    let omega = indices.iter().map(|&i| energies[i] * RAD_PER_PS_PER_WAVENUMBER).collect();
    SectorOperator { indices, row_ptr, col, xx, zz, xz, jy_im, omega, diag_pos, row_abs_xx_zz_xz, row_abs_jy }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
