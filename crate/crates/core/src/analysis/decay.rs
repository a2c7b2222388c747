use nalgebra::DMatrix;

use super::lsq::{least_squares, LsqOptions, Model};
use super::trace_weights;
use crate::error::{Error, Result};
use crate::observables::AlignmentTrace;

/// Isotropic limit of `⟨cos²θ₂D⟩`, the fixed asymptote of the decay model.
pub const ISOTROPIC_OFFSET: f64 = 0.5;
/// τ counts as resolved when its relative standard error is at most this.
const MAX_RELATIVE_TAU_ERROR: f64 = 0.5;

/// `S(t) = offset + A·e^{−t/τ}`, t the delay from the pulse peak.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub amplitude: f64,
    /// ps.
    pub tau: f64,
    pub offset: f64,
    /// Over (A, τ). An undetermined τ has infinite variance.
    pub covariance: DMatrix<f64>,
    pub rms_residual: f64,
    /// False when the trace does not pin down τ; the A estimate is then
    /// taken at the initial τ.
    pub resolvable: bool,
}

impl DecayFit {
    pub fn amplitude_err(&self) -> f64 {
        self.covariance[(0, 0)].max(0.0).sqrt()
    }

    pub fn tau_err(&self) -> f64 {
        self.covariance[(1, 1)].max(0.0).sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-t / self.tau).exp()
    }
}

struct FixedOffsetDecay {
    offset: f64,
}

impl Model for FixedOffsetDecay {
    fn n_params(&self) -> usize {
        2
    }

    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        self.offset + p[0] * (-t / p[1]).exp()
    }

    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) -> bool {
        let e = (-t / p[1]).exp();
        g[0] = e;
        g[1] = p[0] * e * t / (p[1] * p[1]);
        true
    }
}

/// Fits `offset + A e^{−t/τ}` with the offset held fixed. The starting τ is
/// the best of a logarithmic scan with A solved in closed form, so the
/// result does not depend on a user guess.
pub fn fit_exponential_decay(trace: &AlignmentTrace, offset: f64) -> Result<DecayFit> {
    if trace.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", trace.len())));
    }
    let t = &trace.delays;
    let y: Vec<f64> = trace.values.iter().map(|v| v - offset).collect();
    let w: Vec<f64> = match trace_weights(trace) {
        Some(s) => s.iter().map(|s| 1.0 / (s * s)).collect(),
        None => vec![1.0; t.len()],
    };
    let span = (t[t.len() - 1] - t[0]).max(f64::MIN_POSITIVE);
    let scale = t.iter().map(|v| v.abs()).fold(span, f64::max);

    // A(τ) = Σ w y e / Σ w e², cost = Σ w y² − (Σ w y e)² / Σ w e²
    let profile = |tau: f64| -> (f64, f64) {
        let (mut sye, mut see, mut syy) = (0.0, 0.0, 0.0);
        for ((ti, yi), wi) in t.iter().zip(&y).zip(&w) {
            let e = (-ti / tau).exp();
            sye += wi * yi * e;
            see += wi * e * e;
            syy += wi * yi * yi;
        }
        if see > 0.0 {
            (sye / see, syy - sye * sye / see)
        } else {
            (0.0, syy)
        }
    };
    let (mut tau0, mut best) = (span, f64::INFINITY);
    for k in 0..=120 {
        let tau = span * 10f64.powf(-1.5 + 3.5 * k as f64 / 120.0);
        let (_, c) = profile(tau);
        if c < best * (1.0 - 1e-12) {
            best = c;
            tau0 = tau;
        }
    }
    let (a0, _) = profile(tau0);

    let model = FixedOffsetDecay { offset };
    match least_squares(&model, t, &trace.values, trace_weights(trace).as_deref(), &[a0, tau0], &LsqOptions::default())
    {
        Ok(fit) if fit.params[1] > 0.0 => {
            let mut out = DecayFit {
                amplitude: fit.params[0],
                tau: fit.params[1],
                offset,
                covariance: fit.covariance,
                rms_residual: fit.rms_residual,
                resolvable: true,
            };
            out.resolvable = out.tau_err() <= MAX_RELATIVE_TAU_ERROR * out.tau && out.tau <= 100.0 * scale;
            Ok(out)
        }
        Ok(_) | Err(Error::SingularJacobian(_)) | Err(Error::NotConverged { .. }) => {
            unresolved(trace, &model, tau0, a0)
        }
        Err(e) => Err(e),
    }
}

/// A with τ held at `tau`; τ reported with infinite variance.
fn unresolved(trace: &AlignmentTrace, model: &FixedOffsetDecay, tau: f64, a: f64) -> Result<DecayFit> {
    let t = &trace.delays;
    let weights = trace_weights(trace);
    let (mut see, mut chi2) = (0.0, 0.0);
    let mut ss = 0.0;
    for (i, (&ti, &yi)) in t.iter().zip(&trace.values).enumerate() {
        let wi = weights.as_ref().map_or(1.0, |s| 1.0 / (s[i] * s[i]));
        let e = (-ti / tau).exp();
        let r = yi - model.eval(ti, &[a, tau]);
        see += wi * e * e;
        chi2 += wi * r * r;
        ss += r * r;
    }
    let s2 = chi2 / (t.len() - 1) as f64;
    let var_a = if see > 0.0 { s2 / see } else { f64::INFINITY };
    Ok(DecayFit {
        amplitude: a,
        tau,
        offset: model.offset,
        covariance: DMatrix::from_row_slice(2, 2, &[var_a, 0.0, 0.0, f64::INFINITY]),
        rms_residual: (ss / t.len() as f64).sqrt(),
        resolvable: false,
    })
}
