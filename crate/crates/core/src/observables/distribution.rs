use crate::dynamics::Mixture;

use super::detector::Detector;

/// Axis probability density on the detector's quadrature grid, polar angle
/// from lab Z and azimuth from lab X.
#[derive(Debug, Clone)]
pub struct AxisDistribution {
    /// Density per node, row-major in (polar, azimuth).
    pub density: Vec<f64>,
    /// Quadrature weight per node.
    pub weights: Vec<f64>,
    /// Unit vector per node.
    pub nodes: Vec<[f64; 3]>,
}

impl AxisDistribution {
    pub fn from_mixture(detector: &Detector, mix: &Mixture) -> Self {
        let grid = detector.grid();
        let (weights, nodes): (Vec<f64>, Vec<[f64; 3]>) = grid.nodes().unzip();
        let mut density = vec![0.0; grid.len()];
        for (w, v) in &mix.pure {
            for (d, a) in density.iter_mut().zip(detector.amplitudes_on_grid(v)) {
                *d += w * a.norm_sqr();
            }
        }
        for (n, &p) in mix.diagonal.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let v = detector.frame().column(n);
            for (d, a) in density.iter_mut().zip(detector.amplitudes_on_grid(&v)) {
                *d += p * a.norm_sqr();
            }
        }
        Self { density, weights, nodes }
    }

    /// `∫ f(û) ρ(û) dΩ`.
    pub fn expect(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.density.iter().zip(&self.weights).zip(&self.nodes).map(|((d, w), u)| d * w * f(*u)).sum()
    }

    pub fn total(&self) -> f64 {
        self.expect(|_| 1.0)
    }

    pub fn min_density(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `⟨u_x²/(u_x²+u_y²)⟩` by direct quadrature. The grid has no node on
    /// the Z axis, so the ratio is always defined.
    pub fn cos2theta_2d(&self) -> f64 {
        self.expect(|u| u[0] * u[0] / (u[0] * u[0] + u[1] * u[1]))
    }
}
