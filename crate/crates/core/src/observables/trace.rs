use rayon::prelude::*;

use super::detector::Detector;
use super::sampling::{cos2theta_2d_sampled, point_seed};
use crate::dynamics::DensityTrajectory;
use crate::error::{Error, Result};

/// `⟨cos²θ₂D⟩` versus pump–probe delay.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTrace {
    /// ps, strictly ascending.
    pub delays: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub metadata: String,
}

impl AlignmentTrace {
    pub fn new(delays: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>, metadata: impl Into<String>) -> Result<Self> {
        if values.len() != delays.len() {
            return Err(Error::DimensionMismatch { expected: delays.len(), got: values.len() });
        }
        if stderr.len() != delays.len() {
            return Err(Error::DimensionMismatch { expected: delays.len(), got: stderr.len() });
        }
        if delays.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trace delays must be strictly ascending".into()));
        }
        if stderr.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::InvalidParameter("standard errors must be >= 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("trace values must be finite".into()));
        }
        Ok(Self { delays, values, stderr, metadata: metadata.into() })
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Points with `lo ≤ delay ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.delays[i] >= lo && self.delays[i] <= hi).collect();
        Self {
            delays: keep.iter().map(|&i| self.delays[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            stderr: keep.iter().map(|&i| self.stderr[i]).collect(),
            metadata: self.metadata.clone(),
        }
    }
}

/// Exact trace with zero error bars.
pub fn exact_trace(detector: &Detector, traj: &DensityTrajectory, metadata: &str) -> Result<AlignmentTrace> {
    let values = traj.states.iter().map(|m| detector.cos2theta_2d(m)).collect();
    AlignmentTrace::new(traj.times.clone(), values, vec![0.0; traj.len()], metadata)
}

/// Shot-noise trace: `n_ions` per delay, seeded per point from `seed`.
pub fn sampled_trace(
    detector: &Detector,
    traj: &DensityTrajectory,
    n_ions: usize,
    seed: u64,
    min_radius: f64,
    metadata: &str,
) -> Result<AlignmentTrace> {
    let samples = traj
        .states
        .par_iter()
        .enumerate()
        .map(|(i, m)| cos2theta_2d_sampled(detector, m, n_ions, point_seed(seed, i as u64), min_radius))
        .collect::<Result<Vec<_>>>()?;
    AlignmentTrace::new(
        traj.times.clone(),
        samples.iter().map(|s| s.value).collect(),
        samples.iter().map(|s| s.stderr).collect(),
        metadata,
    )
}
