use serde::{Deserialize, Serialize};

use super::simplex::nelder_mead;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub params: GarchParams,
    /// Sample mean removed before fitting.
    pub mean: f64,
    /// Conditional variance `h_t` for every observation.
    pub variances: Vec<f64>,
    /// Mean Gaussian log-likelihood per observation (constants dropped).
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub const MIN_OBS: usize = 250;
pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITER: usize = 500;

/// `h_0 = h0`, `h_t = ω + α ε²_{t-1} + β h_{t-1}`.
pub fn garch11_variances(residuals: &[f64], params: &GarchParams, h0: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(residuals.len());
    let mut prev = h0;
    h.push(prev);
    for e in &residuals[..residuals.len().saturating_sub(1)] {
        prev = params.omega + params.alpha * e * e + params.beta * prev;
        h.push(prev);
    }
    h
}

fn neg_loglik(residuals: &[f64], params: &GarchParams, h0: f64) -> f64 {
    let h = garch11_variances(residuals, params, h0);
    let n = residuals.len() as f64;
    residuals.iter().zip(&h).map(|(e, v)| v.ln() + e * e / v).sum::<f64>() / (2.0 * n)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Maps unconstrained `(θ0, θ1, θ2)` to `ω = var·e^{θ0}`, persistence
/// `α + β = logistic(θ1)` and ARCH share `α / (α + β) = logistic(θ2)`.
fn to_params(theta: &[f64], var: f64) -> GarchParams {
    let persistence = logistic(theta[1]);
    let share = logistic(theta[2]);
    GarchParams {
        omega: var * theta[0].exp(),
        alpha: persistence * share,
        beta: persistence * (1.0 - share),
    }
}

/// Gaussian quasi-maximum-likelihood GARCH(1,1) on the demeaned series.
pub fn garch11_fit(series: &[f64]) -> Result<GarchFit> {
    let n = series.len();
    if n < MIN_OBS {
        return Err(Error::InsufficientData {
            required: MIN_OBS,
            available: n,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries);
    }
    let mean = linalg::mean(series);
    let var = linalg::variance(series);
    if linalg::is_constant(series) {
        return Err(Error::DegenerateSeries);
    }
    let resid: Vec<f64> = series.iter().map(|v| v - mean).collect();

    let objective = |theta: &[f64]| neg_loglik(&resid, &to_params(theta, var), var);
    let start = [(0.05f64).ln(), logit(0.95), logit(0.05 / 0.95)];
    let first = nelder_mead(objective, &start, 0.5, TOLERANCE, MAX_ITER);
    // One restart from the best point guards against a collapsed simplex.
    let budget = MAX_ITER - first.iterations;
    let second = nelder_mead(objective, &first.x, 0.1, TOLERANCE, budget);
    let best = if second.value <= first.value { second.clone() } else { first.clone() };
    let params = to_params(&best.x, var);
    Ok(GarchFit {
        params,
        mean,
        variances: garch11_variances(&resid, &params, var),
        log_likelihood: -best.value,
        converged: first.converged && second.converged,
        iterations: first.iterations + second.iterations,
    })
}
