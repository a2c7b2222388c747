use nalgebra::DMatrix;

use super::lsq::{least_squares, LsqOptions, Model};
use crate::error::{Error, Result};

const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;
/// The fit window extends from the maximum while the curve stays above
/// this fraction of the peak height over the scan minimum.
const WINDOW_FRACTION: f64 = 0.2;
const MIN_WINDOW_POINTS: usize = 5;

/// Observable versus centrifuge frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCurve {
    /// GHz, strictly ascending.
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl ScanCurve {
    pub fn new(frequencies: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if values.len() != frequencies.len() {
            return Err(Error::DimensionMismatch { expected: frequencies.len(), got: values.len() });
        }
        if stderr.len() != frequencies.len() {
            return Err(Error::DimensionMismatch { expected: frequencies.len(), got: stderr.len() });
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("scan frequencies must be strictly ascending".into()));
        }
        if values.iter().chain(&stderr).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("scan values must be finite".into()));
        }
        Ok(Self { frequencies, values, stderr })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakModel {
    #[default]
    Gaussian,
    Lorentzian,
}

impl PeakModel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "lorentzian" => Ok(Self::Lorentzian),
            _ => Err(Error::InvalidParameter(format!("unknown peak model `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Lorentzian => "lorentzian",
        }
    }

    /// Unit-height profile at offset `x` from the center, `w` the FWHM.
    fn shape(self, x: f64, w: f64) -> f64 {
        let u = x / w;
        match self {
            Self::Gaussian => (-FOUR_LN2 * u * u).exp(),
            Self::Lorentzian => 1.0 / (1.0 + 4.0 * u * u),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFit {
    pub center: f64,
    /// Full width at half maximum, GHz.
    pub width: f64,
    pub height: f64,
    pub baseline: f64,
    pub model: PeakModel,
    /// Over (center, width, height, baseline).
    pub covariance: DMatrix<f64>,
    pub rms_residual: f64,
    /// Scan indices used by the fit, inclusive.
    pub window: (usize, usize),
}

impl PeakFit {
    pub fn center_err(&self) -> f64 {
        self.covariance[(0, 0)].max(0.0).sqrt()
    }

    pub fn width_err(&self) -> f64 {
        self.covariance[(1, 1)].max(0.0).sqrt()
    }

    pub fn eval(&self, f: f64) -> f64 {
        self.baseline + self.height * self.model.shape(f - self.center, self.width)
    }
}

struct Lineshape(PeakModel);

impl Model for Lineshape {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[3] + p[2] * self.0.shape(x - p[0], p[1])
    }

    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) -> bool {
        let d = x - p[0];
        let w = p[1];
        let s = self.0.shape(d, w);
        // ∂s/∂d and ∂s/∂w
        let (ds_dd, ds_dw) = match self.0 {
            PeakModel::Gaussian => (-2.0 * FOUR_LN2 * d / (w * w) * s, 2.0 * FOUR_LN2 * d * d / (w * w * w) * s),
            PeakModel::Lorentzian => (-8.0 * d / (w * w) * s * s, 8.0 * d * d / (w * w * w) * s * s),
        };
        g[0] = -p[2] * ds_dd;
        g[1] = p[2] * ds_dw;
        g[2] = s;
        g[3] = 1.0;
        true
    }
}

/// Fits the lineshape over a window around the scan maximum. A maximum on
/// the first or last grid point is rejected as unbracketed.
pub fn fit_resonance_peak(scan: &ScanCurve, model: PeakModel) -> Result<PeakFit> {
    let n = scan.len();
    if n < MIN_WINDOW_POINTS {
        return Err(Error::Fit(format!("need at least {MIN_WINDOW_POINTS} scan points, got {n}")));
    }
    let y = &scan.values;
    let x = &scan.frequencies;
    let imax = (0..n).fold(0, |b, i| if y[i] > y[b] { i } else { b });
    if imax == 0 || imax == n - 1 {
        return Err(Error::Unbracketed(x[imax]));
    }
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = ymin + WINDOW_FRACTION * (y[imax] - ymin);
    let (mut lo, mut hi) = (imax, imax);
    while lo > 0 && y[lo - 1] > cut {
        lo -= 1;
    }
    while hi < n - 1 && y[hi + 1] > cut {
        hi += 1;
    }
    // one point past the cut on each side anchors the baseline
    lo = lo.saturating_sub(1);
    hi = (hi + 1).min(n - 1);
    while hi - lo + 1 < MIN_WINDOW_POINTS {
        if lo > 0 && (hi == n - 1 || imax - lo <= hi - imax) {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    let xs = &x[lo..=hi];
    let ys = &y[lo..=hi];
    let base0 = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let height0 = y[imax] - base0;
    let half = base0 + 0.5 * height0;
    let left = (lo..imax).rev().find(|&i| y[i] < half).map_or(x[lo], |i| x[i]);
    let right = (imax + 1..=hi).find(|&i| y[i] < half).map_or(x[hi], |i| x[i]);
    let width0 = (right - left).max(x[imax + 1] - x[imax - 1]);

    let sig: Option<Vec<f64>> = {
        let s = &scan.stderr[lo..=hi];
        s.iter().all(|&v| v > 0.0).then(|| s.to_vec())
    };
    let fit = least_squares(
        &Lineshape(model),
        xs,
        ys,
        sig.as_deref(),
        &[x[imax], width0, height0, base0],
        &LsqOptions::default(),
    )?;
    let p = &fit.params;
    Ok(PeakFit {
        center: p[0],
        width: p[1].abs(),
        height: p[2],
        baseline: p[3],
        model,
        covariance: fit.covariance,
        rms_residual: fit.rms_residual,
        window: (lo, hi),
    })
}
