//! Model fitting: damped sinusoids for in-field traces, resonance peaks for
//! frequency scans and the fixed-asymptote exponential for field-free decay.

mod decay;
mod lsq;
mod peak;
mod sinusoid;

pub use decay::{fit_exponential_decay, DecayFit, ISOTROPIC_OFFSET};
pub use lsq::{central_jacobian, jacobian, least_squares, Convergence, FnModel, LsqFit, LsqOptions, Model};
pub use peak::{fit_resonance_peak, PeakFit, PeakModel, ScanCurve};
pub use sinusoid::{fit_decaying_sinusoid, SinusoidFit, SinusoidOutcome};

pub use crate::rotor::{extract_byz, extract_byz_with_distortion};

use crate::observables::AlignmentTrace;

/// Standard errors to weight by, or `None` when any is zero (exact traces).
fn trace_weights(trace: &AlignmentTrace) -> Option<Vec<f64>> {
    trace.stderr.iter().all(|&s| s > 0.0).then(|| trace.stderr.clone())
}
