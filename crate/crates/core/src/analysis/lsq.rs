use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A scalar model `y = f(x; p)`.
pub trait Model {
    fn n_params(&self) -> usize;

    fn eval(&self, x: f64, p: &[f64]) -> f64;

    /// Writes `∂f/∂p` into `g` and returns true, or returns false to fall
    /// back to central differences.
    fn gradient(&self, _x: f64, _p: &[f64], _g: &mut [f64]) -> bool {
        false
    }
}

/// Wraps a closure as a [`Model`] without an analytic gradient.
pub struct FnModel<F> {
    n: usize,
    f: F,
}

impl<F: Fn(f64, &[f64]) -> f64> FnModel<F> {
    pub fn new(n_params: usize, f: F) -> Self {
        Self { n: n_params, f }
    }
}

impl<F: Fn(f64, &[f64]) -> f64> Model for FnModel<F> {
    fn n_params(&self) -> usize {
        self.n
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        (self.f)(x, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqOptions {
    /// Function evaluations of the full residual, accepted or not.
    pub max_iterations: usize,
    /// Stop when `‖δp‖ ≤ step_tol·(‖p‖ + step_tol)`.
    pub step_tol: f64,
    /// Stop when `‖Jᵀr‖∞ < grad_tol` (weighted residuals).
    pub grad_tol: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self { max_iterations: 500, step_tol: 1e-10, grad_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Step,
    Gradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqFit {
    pub params: Vec<f64>,
    /// `(JᵀWJ)⁻¹` scaled by the reduced chi-square.
    pub covariance: DMatrix<f64>,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
    /// Unweighted RMS residual.
    pub rms_residual: f64,
    pub iterations: usize,
    pub reason: Convergence,
}

impl LsqFit {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.params.len()).map(|i| self.covariance[(i, i)].max(0.0).sqrt()).collect()
    }
}

/// Central-difference Jacobian `∂f(x_i)/∂p_j`.
pub fn central_jacobian<M: Model + ?Sized>(model: &M, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = p.len();
    let mut jac = DMatrix::zeros(x.len(), n);
    let mut q = p.to_vec();
    for j in 0..n {
        let h = f64::EPSILON.cbrt() * p[j].abs().max(1.0);
        q[j] = p[j] + h;
        let up: Vec<f64> = x.iter().map(|&xi| model.eval(xi, &q)).collect();
        q[j] = p[j] - h;
        for (i, &xi) in x.iter().enumerate() {
            jac[(i, j)] = (up[i] - model.eval(xi, &q)) / (2.0 * h);
        }
        q[j] = p[j];
    }
    jac
}

/// Model Jacobian, analytic where the model provides it.
pub fn jacobian<M: Model + ?Sized>(model: &M, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = p.len();
    let mut jac = DMatrix::zeros(x.len(), n);
    let mut g = vec![0.0; n];
    for (i, &xi) in x.iter().enumerate() {
        if !model.gradient(xi, p, &mut g) {
            return central_jacobian(model, x, p);
        }
        for j in 0..n {
            jac[(i, j)] = g[j];
        }
    }
    jac
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling. `sigma` gives
/// per-point standard errors; `None` weights all points equally.
pub fn least_squares<M: Model + ?Sized>(
    model: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    p0: &[f64],
    options: &LsqOptions,
) -> Result<LsqFit> {
    let n = model.n_params();
    if p0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p0.len() });
    }
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < n {
        return Err(Error::Fit(format!("{} data points for {n} parameters", x.len())));
    }
    if x.iter().chain(y).chain(p0).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data or initial guess".into()));
    }
    let inv_sigma: Vec<f64> = match sigma {
        None => vec![1.0; x.len()],
        Some(s) => {
            if s.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: x.len(), got: s.len() });
            }
            if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::Fit("standard errors must be finite and > 0".into()));
            }
            s.iter().map(|v| 1.0 / v).collect()
        }
    };

    let residuals = |p: &[f64]| -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            x.iter().zip(y).zip(&inv_sigma).map(|((&xi, &yi), w)| (yi - model.eval(xi, p)) * w),
        )
    };
    let weighted_jacobian = |p: &[f64]| -> DMatrix<f64> {
        let mut jac = jacobian(model, x, p);
        for (i, w) in inv_sigma.iter().enumerate() {
            jac.row_mut(i).scale_mut(*w);
        }
        jac
    };

    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::Fit("model is not finite at the initial guess".into()));
    }
    let mut jac = weighted_jacobian(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let reason = loop {
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() < options.grad_tol {
            break Convergence::Gradient;
        }
        if iterations >= options.max_iterations {
            return Err(Error::NotConverged { iterations, cost, best: p });
        }
        iterations += 1;
        let diag_floor = 1e-12 * a.diagonal().amax().max(f64::MIN_POSITIVE);
        let mut damped = a.clone();
        for j in 0..n {
            damped[(j, j)] += lambda * a[(j, j)].max(diag_floor);
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= 10.0;
            continue;
        };
        let delta = chol.solve(&g);
        let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let r_trial = residuals(&trial);
        let cost_trial = r_trial.norm_squared();
        let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let small_step = delta.norm() <= options.step_tol * (p_norm + options.step_tol);
        // Near the optimum the cost change drops below rounding; steps
        // within that noise are taken rather than damped away.
        if cost_trial.is_finite() && cost_trial <= cost * (1.0 + 16.0 * f64::EPSILON) {
            p = trial;
            r = r_trial;
            cost = cost_trial;
            jac = weighted_jacobian(&p);
            lambda = (lambda / 10.0).max(1e-12);
            if small_step {
                break Convergence::Step;
            }
        } else if small_step {
            break Convergence::Step;
        } else {
            lambda *= 10.0;
        }
    };

    let covariance = scaled_covariance(&jac, cost, x.len())?;
    let rms = {
        let ss: f64 = x.iter().zip(y).map(|(&xi, &yi)| (yi - model.eval(xi, &p)).powi(2)).sum();
        (ss / x.len() as f64).sqrt()
    };
    Ok(LsqFit { params: p, covariance, chi2: cost, rms_residual: rms, iterations, reason })
}

/// `s²(JᵀJ)⁻¹` with `s² = χ²/(n − p)`. A (numerically) rank-deficient
/// `JᵀJ` is reported with the parameter dominating its null direction.
fn scaled_covariance(jac: &DMatrix<f64>, chi2: f64, n_points: usize) -> Result<DMatrix<f64>> {
    let n = jac.ncols();
    // Column scaling makes the rank test independent of parameter units.
    let scale: Vec<f64> = (0..n).map(|j| jac.column(j).norm()).collect();
    if let Some(j) = scale.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::SingularJacobian(j));
    }
    let mut js = jac.clone();
    for (j, s) in scale.iter().enumerate() {
        js.column_mut(j).unscale_mut(*s);
    }
    let a = js.transpose() * &js;
    let eig = a.clone().symmetric_eigen();
    let (k_min, &ev_min) =
        eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("at least one parameter");
    if ev_min <= 1e-13 * eig.eigenvalues.amax() {
        let v = eig.eigenvectors.column(k_min);
        let worst = (0..n).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
        return Err(Error::SingularJacobian(worst));
    }
    let inv = a.try_inverse().ok_or(Error::SingularJacobian(0))?;
    let s2 = chi2 / (n_points.saturating_sub(n).max(1)) as f64;
    Ok(DMatrix::from_fn(n, n, |i, j| s2 * inv[(i, j)] / (scale[i] * scale[j])))
}
