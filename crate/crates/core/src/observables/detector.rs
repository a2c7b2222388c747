use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dynamics::{AngleOperators, FieldFreeFrame, Mixture, RotorSystem};
use crate::error::Result;
use crate::field::FieldWaveform;
use crate::rotor::sphere::{gauss_legendre, LegendreTable, SphereGrid};
use crate::rotor::{Basis, BasisState};

/// Precomputed tables for evaluating detected observables on one basis.
#[derive(Debug, Clone)]
pub struct Detector {
    basis: Basis,
    frame: FieldFreeFrame,
    grid: SphereGrid,
    /// `Ȳ_JM(θ_i)` per polar node, indexed like the basis.
    polar: Vec<Vec<f64>>,
    /// `e^{iMφ_k}` per azimuthal node, indexed by `M + J_max`.
    azimuth: Vec<Vec<Complex64>>,
    /// Nonzero entries of the cos²θ₂D operator (real symmetric).
    g: Vec<(usize, usize, f64)>,
    g_frame_diag: Vec<f64>,
    ops: AngleOperators,
}

impl Detector {
    pub fn new(system: &RotorSystem) -> Result<Self> {
        let basis = system.basis().clone();
        let j_max = basis.j_max();
        let grid = SphereGrid::for_j_max(j_max);
        let polar = grid
            .cos_theta
            .iter()
            .map(|&x| {
                let t = LegendreTable::new(j_max as usize, x);
                basis.states().iter().map(|s| t.get(s.j as usize, s.m)).collect()
            })
            .collect();
        let jm = j_max as i32;
        let azimuth =
            grid.phi.iter().map(|&p| (-jm..=jm).map(|m| Complex64::from_polar(1.0, m as f64 * p)).collect()).collect();
        let g = cos2_azimuth_operator(&basis);
        let frame = system.frame().clone();
        let g_frame_diag = (0..basis.len())
            .map(|n| {
                let v = frame.column(n);
                sparse_expectation(&g, &v)
            })
            .collect();
        let ops = AngleOperators::new(&basis)?;
        Ok(Self { basis, frame, grid, polar, azimuth, g, g_frame_diag, ops })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn frame(&self) -> &FieldFreeFrame {
        &self.frame
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    /// `⟨cos²θ₂D⟩` of a pure state (need not be normalized).
    pub fn cos2theta_2d_pure(&self, psi: &DVector<Complex64>) -> f64 {
        sparse_expectation(&self.g, psi)
    }

    /// `⟨cos²θ₂D⟩` of a mixture, exact.
    pub fn cos2theta_2d(&self, mix: &Mixture) -> f64 {
        let mut s = 0.0;
        for (w, v) in &mix.pure {
            s += w * self.cos2theta_2d_pure(v);
        }
        for (d, g) in mix.diagonal.iter().zip(&self.g_frame_diag) {
            s += d * g;
        }
        s
    }

    /// `⟨u_x²⟩, ⟨u_z²⟩, ⟨u_x u_z⟩` of a mixture.
    pub fn xz_moments(&self, mix: &Mixture) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mats = [&self.ops.xx, &self.ops.zz, &self.ops.xz];
        let mut add = |w: f64, v: &DVector<Complex64>| {
            let re = v.map(|z| z.re);
            let im = v.map(|z| z.im);
            for (o, &m) in out.iter_mut().zip(&mats) {
                *o += w * (re.dot(&(m * &re)) + im.dot(&(m * &im)));
            }
        };
        for (w, v) in &mix.pure {
            add(*w, v);
        }
        for (n, d) in mix.diagonal.iter().enumerate() {
            if *d != 0.0 {
                add(*d, &self.frame.column(n));
            }
        }
        out
    }

    /// `⟨(ε̂(t)·û)²⟩`, the 3D alignment along the instantaneous polarization.
    pub fn cos2_3d_field(&self, mix: &Mixture, field: &FieldWaveform, t: f64) -> f64 {
        let [xx, zz, xz] = self.xz_moments(mix);
        let (s, c) = field.polarization_angle(t).sin_cos();
        c * c * xx + s * s * zz + 2.0 * s * c * xz
    }

    /// `ψ(θ_i, φ_k)` over the grid, row-major in (i, k).
    pub(crate) fn amplitudes_on_grid(&self, psi: &DVector<Complex64>) -> Vec<Complex64> {
        let jm = self.basis.j_max() as i32;
        let nm = (2 * jm + 1) as usize;
        let mut out = Vec::with_capacity(self.grid.len());
        let mut partial = vec![Complex64::new(0.0, 0.0); nm];
        let active: Vec<usize> = (0..psi.len()).filter(|&b| psi[b].norm_sqr() > 0.0).collect();
        for row in &self.polar {
            partial.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for &b in &active {
                let s = self.basis.state(b);
                partial[(s.m + jm) as usize] += psi[b] * row[b];
            }
            let ms: Vec<usize> = (0..nm).filter(|&m| partial[m].norm_sqr() > 0.0).collect();
            for az in &self.azimuth {
                out.push(ms.iter().map(|&m| partial[m] * az[m]).sum());
            }
        }
        out
    }
}

/// `⟨ψ|G|ψ⟩` for a real symmetric sparse G listed with both triangles.
fn sparse_expectation(g: &[(usize, usize, f64)], psi: &DVector<Complex64>) -> f64 {
    g.iter().map(|&(a, b, v)| v * (psi[a].conj() * psi[b]).re).sum()
}

/// Matrix of `u_x²/(u_x²+u_y²) = ½ + ¼(e^{2iφ} + e^{−2iφ})`, φ the azimuth
/// about Z. Only ΔM = 0, ±2 survive; the polar overlaps are integrated
/// exactly with Gauss–Legendre nodes.
fn cos2_azimuth_operator(basis: &Basis) -> Vec<(usize, usize, f64)> {
    let j_max = basis.j_max() as usize;
    let (x, w) = gauss_legendre(j_max + 2);
    let tables: Vec<LegendreTable> = x.iter().map(|&xi| LegendreTable::new(j_max, xi)).collect();
    // ⟨J', M+2| e^{2iφ} |J, M⟩ = 2π ∫ Ȳ_{J',M+2} Ȳ_{J,M} d(cos θ)
    let overlap = |a: BasisState, b: BasisState| -> f64 {
        2.0 * PI
            * tables.iter().zip(&w).map(|(t, wi)| wi * t.get(a.j as usize, a.m) * t.get(b.j as usize, b.m)).sum::<f64>()
    };
    let mut g = Vec::new();
    for (a, sa) in basis.states().iter().enumerate() {
        g.push((a, a, 0.5));
        for (b, sb) in basis.states().iter().enumerate() {
            if sa.m == sb.m + 2 {
                let v = 0.25 * overlap(*sa, *sb);
                if v.abs() > 1e-15 {
                    g.push((a, b, v));
                    g.push((b, a, v));
                }
            }
        }
    }
    g.sort_by_key(|e| (e.0, e.1));
    g
}
