//! Spherical harmonics and product quadrature on the unit sphere.
//!
//! Everything here is evaluated directly from the associated-Legendre
//! recurrence, so it can serve as an oracle for the 3j-based operator
//! construction.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Table of orthonormal associated Legendre functions `Ȳ_lm(θ)` for
/// `0 ≤ m ≤ l ≤ l_max`, Condon–Shortley phase included, such that
/// `Y_lm(θ, φ) = Ȳ_lm(θ) e^{imφ}`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    l_max: usize,
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn new(l_max: usize, cos_theta: f64) -> Self {
        let mut t = Self { l_max, values: vec![0.0; (l_max + 1) * (l_max + 2) / 2] };
        t.fill(cos_theta);
        t
    }

    fn idx(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    pub fn fill(&mut self, x: f64) {
        let s = (1.0 - x * x).max(0.0).sqrt();
        let l_max = self.l_max;
        let v = &mut self.values;
        v[0] = 0.5 / PI.sqrt();
        for m in 1..=l_max {
            let mf = m as f64;
            v[Self::idx(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * v[Self::idx(m - 1, m - 1)];
        }
        for m in 0..l_max {
            let mf = m as f64;
            v[Self::idx(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * v[Self::idx(m, m)];
            for l in (m + 2)..=l_max {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                v[Self::idx(l, m)] = a * (x * v[Self::idx(l - 1, m)] - b * v[Self::idx(l - 2, m)]);
            }
        }
    }

    /// `Ȳ_lm(θ)` for any sign of m (`Ȳ_{l,-m} = (-1)^m Ȳ_lm`).
    pub fn get(&self, l: usize, m: i32) -> f64 {
        let am = m.unsigned_abs() as usize;
        let v = self.values[Self::idx(l, am)];
        if m < 0 && am % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// `Y_lm(θ, φ)`.
pub fn spherical_harmonic(l: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
    let t = LegendreTable::new(l, theta.cos());
    Complex64::from_polar(t.get(l, m), m as f64 * phi)
}

/// Product grid: Gauss–Legendre in cos θ times uniform azimuth. No node
/// lies on a pole.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub cos_theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (cos_theta, theta_weights) = gauss_legendre(n_theta);
        let phi = (0..n_phi).map(|k| TAU * (k as f64 + 0.5) / n_phi as f64).collect();
        Self { cos_theta, theta_weights, phi }
    }

    /// Grid exact for densities band-limited to degree `2 j_max`.
    pub fn for_j_max(j_max: u32) -> Self {
        let j = j_max as usize;
        Self::new(2 * j + 2, 4 * j + 4)
    }

    pub fn len(&self) -> usize {
        self.cos_theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phi_weight(&self) -> f64 {
        TAU / self.phi.len() as f64
    }

    /// Iterates `(weight, [u_x, u_y, u_z])` over all nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, [f64; 3])> + '_ {
        let wphi = self.phi_weight();
        self.cos_theta.iter().zip(&self.theta_weights).flat_map(move |(&z, &wt)| {
            let s = (1.0 - z * z).sqrt();
            self.phi.iter().map(move |&p| (wt * wphi, [s * p.cos(), s * p.sin(), z]))
        })
    }

    /// `∫ f(û) dΩ`.
    pub fn integrate(&self, mut f: impl FnMut([f64; 3]) -> f64) -> f64 {
        self.nodes().map(|(w, u)| w * f(u)).sum()
    }
}
