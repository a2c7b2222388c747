use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::lsq::{least_squares, LsqOptions, Model};
use super::trace_weights;
use crate::error::{Error, Result};
use crate::observables::AlignmentTrace;

/// GHz × ps → cycles.
const CYCLES_PER_GHZ_PS: f64 = 1e-3;
/// Zero-padding factor for the initial spectrum.
const PAD: usize = 8;
/// A spectral peak must exceed this multiple of the estimated mean noise
/// power to count as an oscillation.
const NOISE_FACTOR: f64 = 20.0;

/// `offset + A·e^{−γ(t−t₀)}·cos(2π f (t−t₀) + φ)`, t₀ the first delay.
#[derive(Debug, Clone, PartialEq)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency_ghz: f64,
    /// rad, at `t_ref`.
    pub phase: f64,
    /// 1/ps; may come out slightly negative for undamped data.
    pub damping_rate: f64,
    pub t_ref: f64,
    /// Over (offset, amplitude, frequency, phase, damping rate).
    pub covariance: DMatrix<f64>,
    pub rms_residual: f64,
}

impl SinusoidFit {
    /// ps; infinite when the fitted rate is not positive.
    pub fn damping_time(&self) -> f64 {
        if self.damping_rate > 0.0 {
            1.0 / self.damping_rate
        } else {
            f64::INFINITY
        }
    }

    pub fn std_error(&self, k: usize) -> f64 {
        self.covariance[(k, k)].max(0.0).sqrt()
    }

    pub fn frequency_err(&self) -> f64 {
        self.std_error(2)
    }

    pub fn amplitude_err(&self) -> f64 {
        self.std_error(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        DampedCosine { t_ref: self.t_ref }
            .eval(t, &[self.offset, self.amplitude, self.frequency_ghz, self.phase, self.damping_rate])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SinusoidOutcome {
    Fit(SinusoidFit),
    /// The strongest spectral peak does not clear the noise floor.
    NoOscillation {
        peak_power: f64,
        noise_floor: f64,
    },
}

impl SinusoidOutcome {
    pub fn fit(&self) -> Option<&SinusoidFit> {
        match self {
            SinusoidOutcome::Fit(f) => Some(f),
            SinusoidOutcome::NoOscillation { .. } => None,
        }
    }
}

struct DampedCosine {
    t_ref: f64,
}

impl Model for DampedCosine {
    fn n_params(&self) -> usize {
        5
    }

    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        let s = t - self.t_ref;
        p[0] + p[1] * (-p[4] * s).exp() * (TAU * p[2] * s * CYCLES_PER_GHZ_PS + p[3]).cos()
    }

    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) -> bool {
        let s = t - self.t_ref;
        let env = (-p[4] * s).exp();
        let arg = TAU * p[2] * s * CYCLES_PER_GHZ_PS + p[3];
        let (sin, cos) = arg.sin_cos();
        g[0] = 1.0;
        g[1] = env * cos;
        g[2] = -p[1] * env * sin * TAU * s * CYCLES_PER_GHZ_PS;
        g[3] = -p[1] * env * sin;
        g[4] = -s * p[1] * env * cos;
        true
    }
}

/// Fits a single exponentially damped cosine. The frequency guess is the
/// strongest peak of the zero-padded spectrum of the detrended, uniformly
/// resampled trace, searched from two cycles per span upward; equal peaks
/// resolve to the lower frequency.
pub fn fit_decaying_sinusoid(trace: &AlignmentTrace) -> Result<SinusoidOutcome> {
    if trace.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 points, got {}", trace.len())));
    }
    let t = &trace.delays;
    let t_ref = t[0];
    let span = t[t.len() - 1] - t_ref;
    let guess = match spectral_guess(t, &trace.values) {
        Guess::Peak(g) => g,
        Guess::BelowFloor { peak_power, noise_floor } => {
            return Ok(SinusoidOutcome::NoOscillation { peak_power, noise_floor });
        }
    };
    let model = DampedCosine { t_ref };
    let p0 = [guess.offset, guess.amplitude, guess.frequency, guess.phase, 0.0];
    let fit = least_squares(&model, t, &trace.values, trace_weights(trace).as_deref(), &p0, &LsqOptions::default())?;
    let mut p = fit.params.clone();
    // Canonical form: A ≥ 0, f > 0, φ in (−π, π].
    let mut sign = [1.0; 5];
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[3] += PI;
        sign[1] = -1.0;
    }
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] = -p[3];
        sign[2] = -1.0;
        sign[3] = -1.0;
    }
    p[3] = wrap_phase(p[3]);
    if p[2] * span * CYCLES_PER_GHZ_PS < 2.0 {
        return Err(Error::Fit(format!(
            "fitted frequency {:.4} GHz gives fewer than two periods over {span} ps",
            p[2]
        )));
    }
    let covariance = DMatrix::from_fn(5, 5, |i, j| sign[i] * sign[j] * fit.covariance[(i, j)]);
    Ok(SinusoidOutcome::Fit(SinusoidFit {
        offset: p[0],
        amplitude: p[1],
        frequency_ghz: p[2],
        phase: p[3],
        damping_rate: p[4],
        t_ref,
        covariance,
        rms_residual: fit.rms_residual,
    }))
}

fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

struct PeakGuess {
    offset: f64,
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

enum Guess {
    Peak(PeakGuess),
    BelowFloor { peak_power: f64, noise_floor: f64 },
}

fn spectral_guess(t: &[f64], y: &[f64]) -> Guess {
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    let mut steps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    let dt = steps[steps.len() / 2];
    let n = (span / dt).floor() as usize + 1;

    // Linear detrend, then resample onto a uniform grid.
    let (a, b) = linear_fit(t, y);
    let resampled: Vec<f64> = (0..n)
        .map(|k| {
            let tk = t0 + k as f64 * dt;
            let i = t.partition_point(|&v| v <= tk).clamp(1, t.len() - 1);
            let w = ((tk - t[i - 1]) / (t[i] - t[i - 1])).clamp(0.0, 1.0);
            let v = y[i - 1] + w * (y[i] - y[i - 1]);
            v - (a + b * tk)
        })
        .collect();

    let dft = |f_ghz: f64| -> Complex64 {
        let step = Complex64::from_polar(1.0, -TAU * f_ghz * dt * CYCLES_PER_GHZ_PS);
        let mut ph = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in &resampled {
            acc += v * ph;
            ph *= step;
        }
        acc
    };
    let df = 1.0 / (n as f64 * dt * CYCLES_PER_GHZ_PS);
    let nyquist = 0.5 / (dt * CYCLES_PER_GHZ_PS);

    // Noise floor from the unpadded periodogram: median power / ln 2
    // estimates the mean of exponentially distributed noise power.
    let mut raw: Vec<f64> = (1..n / 2).map(|k| dft(k as f64 * df).norm_sqr()).collect();
    raw.sort_by(f64::total_cmp);
    let noise_floor = if raw.is_empty() { 0.0 } else { raw[raw.len() / 2] / std::f64::consts::LN_2 };

    let f_min = 2.0 / (span * CYCLES_PER_GHZ_PS);
    let fine = df / PAD as f64;
    let mut best: Option<(f64, Complex64)> = None;
    let mut k = (f_min / fine).ceil() as usize;
    while k as f64 * fine <= nyquist {
        let f = k as f64 * fine;
        let x = dft(f);
        if best.is_none_or(|(_, bx)| x.norm_sqr() > bx.norm_sqr() * (1.0 + 1e-9)) {
            best = Some((f, x));
        }
        k += 1;
    }
    let Some((f, x)) = best else {
        return Guess::BelowFloor { peak_power: 0.0, noise_floor };
    };
    let peak_power = x.norm_sqr();
    if !(peak_power > NOISE_FACTOR * noise_floor) {
        return Guess::BelowFloor { peak_power, noise_floor };
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Guess::Peak(PeakGuess { offset: mean, amplitude: 2.0 * x.norm() / n as f64, frequency: f, phase: x.arg() })
}

/// Ordinary least-squares line `(intercept, slope)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}
