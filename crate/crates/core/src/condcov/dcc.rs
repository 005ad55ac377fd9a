use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::garch::{garch11_fit, GarchFit, MAX_ITER, TOLERANCE};
use super::simplex::nelder_mead;
use super::{ConditionalCovariances, Estimator};
use crate::error::Result;
use crate::ingest::ReturnPanel;

#[derive(Debug, Clone, PartialEq)]
pub struct DccFit {
    pub garch: Vec<GarchFit>,
    pub a: f64,
    pub b: f64,
    pub converged: bool,
    /// Conditional correlation `R_t` per date.
    pub correlations: Vec<DMatrix<f64>>,
    pub covariances: ConditionalCovariances,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn to_ab(theta: &[f64]) -> (f64, f64) {
    let s = logistic(theta[0]);
    let u = logistic(theta[1]);
    (s * u, s * (1.0 - u))
}

/// Runs the `Q_t` recursion and calls `visit(t, R_t)` for every date.
fn correlation_path(z: &[DVector<f64>], qbar: &DMatrix<f64>, a: f64, b: f64, mut visit: impl FnMut(usize, DMatrix<f64>)) {
    let k = qbar.nrows();
    let mut q = qbar.clone();
    for t in 0..z.len() {
        if t > 0 {
            let zp = &z[t - 1];
            q = DMatrix::from_fn(k, k, |i, j| (1.0 - a - b) * qbar[(i, j)] + a * zp[i] * zp[j] + b * q[(i, j)]);
        }
        let d: Vec<f64> = (0..k).map(|i| 1.0 / q[(i, i)].sqrt()).collect();
        let r = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { q[(i, j)] * d[i] * d[j] });
        visit(t, r);
    }
}

fn neg_loglik(z: &[DVector<f64>], qbar: &DMatrix<f64>, a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    let mut ok = true;
    correlation_path(z, qbar, a, b, |t, r| {
        if !ok {
            return;
        }
        match r.cholesky() {
            Some(ch) => {
                let logdet: f64 = 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                let sol = ch.solve(&z[t]);
                total += logdet + z[t].dot(&sol) - z[t].dot(&z[t]);
            }
            None => ok = false,
        }
    });
    if ok {
        total / (2.0 * z.len() as f64)
    } else {
        f64::INFINITY
    }
}

/// Two-stage DCC(1,1): univariate GARCH(1,1) per asset, then `(a, b)` by
/// quasi-maximum likelihood of the correlation recursion
/// `Q_t = (1 - a - b) Q̄ + a z_{t-1} z_{t-1}' + b Q_{t-1}` on standardized
/// residuals.
pub fn dcc_fit(panel: &ReturnPanel) -> Result<DccFit> {
    let k = panel.n_assets();
    let n = panel.n_obs();
    let garch: Vec<GarchFit> = (0..k)
        .into_par_iter()
        .map(|j| garch11_fit(&panel.column(j)).map_err(|e| e.for_asset(j)))
        .collect::<Result<_>>()?;

    let r = panel.returns();
    let z: Vec<DVector<f64>> = (0..n)
        .map(|t| DVector::from_fn(k, |j, _| (r[(t, j)] - garch[j].mean) / garch[j].variances[t].sqrt()))
        .collect();
    let mut qbar = DMatrix::zeros(k, k);
    for zt in &z {
        qbar += zt * zt.transpose();
    }
    qbar /= n as f64;
    qbar = crate::linalg::symmetrize(&qbar);

    let objective = |theta: &[f64]| {
        let (a, b) = to_ab(theta);
        neg_loglik(&z, &qbar, a, b)
    };
    let start = [logit(0.97), logit(0.02 / 0.97)];
    let first = nelder_mead(objective, &start, 0.5, TOLERANCE, MAX_ITER);
    let second = nelder_mead(objective, &first.x, 0.1, TOLERANCE, MAX_ITER - first.iterations);
    let best = if second.value <= first.value { &second } else { &first };
    let converged = first.converged && second.converged;
    let (a, b) = to_ab(&best.x);

    let mut correlations = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    correlation_path(&z, &qbar, a, b, |t, rt| {
        let h: Vec<f64> = garch.iter().map(|g| g.variances[t]).collect();
        let sd: Vec<f64> = h.iter().map(|v| v.sqrt()).collect();
        let sigma = DMatrix::from_fn(k, k, |i, j| if i == j { h[i] } else { sd[i] * rt[(i, j)] * sd[j] });
        sigmas.push(sigma);
        correlations.push(rt);
    });

    let mut warnings = Vec::new();
    for (j, g) in garch.iter().enumerate() {
        if !g.converged {
            warnings.push(format!("GARCH for {} did not converge", panel.assets()[j]));
        }
    }
    if !converged {
        warnings.push("DCC stage 2 did not converge".into());
    }
    let covariances = ConditionalCovariances {
        dates: panel.dates().to_vec(),
        assets: panel.assets().to_vec(),
        sigmas,
        estimator: Estimator::Dcc {
            garch: garch.iter().map(|g| g.params).collect(),
            dcc_a: a,
            dcc_b: b,
            converged,
        },
        warnings,
    };
    Ok(DccFit {
        garch,
        a,
        b,
        converged,
        correlations,
        covariances,
    })
}
