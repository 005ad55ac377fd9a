use nalgebra::DMatrix;

use super::{ConditionalCovariances, Estimator};
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::linalg;

pub const DEFAULT_LAMBDA: f64 = 0.94;
pub const DEFAULT_BURN_IN: usize = 60;

/// `Σ_t = λ Σ_{t-1} + (1 - λ) r_t r_t'`, seeded with the sample covariance of
/// the first `burn_in` rows. Output starts at the first post-burn-in date.
pub fn ewma_covariance(panel: &ReturnPanel, lambda: f64, burn_in: usize) -> Result<ConditionalCovariances> {
    let k = panel.n_assets();
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidInput(format!("lambda {lambda} outside (0, 1)")));
    }
    if burn_in < k + 1 {
        return Err(Error::InvalidInput(format!("burn-in {burn_in} must be at least K + 1 = {}", k + 1)));
    }
    if panel.n_obs() <= burn_in {
        return Err(Error::InsufficientData {
            required: burn_in + 1,
            available: panel.n_obs(),
        });
    }
    let r = panel.returns();
    let mut sigma = linalg::symmetrize(&linalg::sample_covariance(&r.rows(0, burn_in).into_owned()));
    let mut warnings = Vec::new();
    let eig = linalg::eigen(&sigma).eigenvalues;
    if linalg::condition_number(&eig) > 1e12 {
        warnings.push(format!("burn-in covariance is singular or ill-conditioned (min eigenvalue {:e})", eig.min()));
    }

    let mut sigmas = Vec::with_capacity(panel.n_obs() - burn_in);
    for t in burn_in..panel.n_obs() {
        let row = r.row(t);
        sigma = DMatrix::from_fn(k, k, |i, j| lambda * sigma[(i, j)] + (1.0 - lambda) * row[i] * row[j]);
        sigmas.push(sigma.clone());
    }
    Ok(ConditionalCovariances {
        dates: panel.dates()[burn_in..].to_vec(),
        assets: panel.assets().to_vec(),
        sigmas,
        estimator: Estimator::Ewma { lambda, burn_in },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::simulate_gaussian;

    #[test]
    fn zero_returns_decay_geometrically() {
        let mut m = simulate_gaussian(&DMatrix::identity(2, 2), 20, 1).unwrap().returns().clone();
        for t in 5..20 {
            m.row_mut(t).fill(0.0);
        }
        let p = ReturnPanel::from_matrix(m).unwrap();
        let cov = ewma_covariance(&p, 0.9, 5).unwrap();
        let s0 = linalg::sample_covariance(&p.returns().rows(0, 5).into_owned());
        for (t, s) in cov.sigmas.iter().enumerate() {
            let expect = &s0 * 0.9f64.powi(t as i32 + 1);
            assert!((s - expect).abs().max() < 1e-14);
        }
        assert_eq!(cov.dates[0], p.dates()[5]);
    }

    #[test]
    fn lambda_near_one_is_sticky() {
        let p = simulate_gaussian(&DMatrix::identity(3, 3), 20, 2).unwrap();
        let cov = ewma_covariance(&p, 0.9999, 10).unwrap();
        let s0 = linalg::sample_covariance(&p.returns().rows(0, 10).into_owned());
        for s in &cov.sigmas {
            // Each of the 10 updates moves Σ by at most 1e-4·|r r' - Σ|.
            assert!((s - &s0).abs().max() < 1e-2);
        }
    }

    #[test]
    fn tracks_known_covariance() {
        let truth = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 2.0]);
        let p = simulate_gaussian(&truth, 5000, 3).unwrap();
        let cov = ewma_covariance(&p, 0.94, 60).unwrap();
        let mut avg = DMatrix::zeros(2, 2);
        for s in &cov.sigmas {
            avg += s;
        }
        avg /= cov.len() as f64;
        for i in 0..2 {
            for j in 0..2 {
                assert!((avg[(i, j)] - truth[(i, j)]).abs() <= 0.15 * truth[(i, j)].abs(), "{avg}");
            }
        }
    }

    #[test]
    fn bit_exact_recomputation_and_validity() {
        let p = simulate_gaussian(&DMatrix::identity(3, 3), 300, 4).unwrap();
        let cov = ewma_covariance(&p, 0.94, 60).unwrap();
        cov.validate().unwrap();
        let mut s = cov.sigmas[0].clone();
        for t in 1..cov.len() {
            let r = p.returns().row(60 + t);
            s = DMatrix::from_fn(3, 3, |i, j| 0.94 * s[(i, j)] + (1.0 - 0.94) * r[i] * r[j]);
            assert_eq!(s, cov.sigmas[t]);
        }
        for t in 0..cov.len() {
            let c = cov.correlation(t).unwrap();
            assert!((0..3).all(|i| c[(i, i)] == 1.0));
        }
    }

    #[test]
    fn invalid_parameters() {
        let p = simulate_gaussian(&DMatrix::identity(3, 3), 30, 5).unwrap();
        assert!(ewma_covariance(&p, 1.0, 10).is_err());
        assert!(ewma_covariance(&p, 0.5, 3).is_err());
        assert!(ewma_covariance(&p, 0.5, 30).is_err());
    }

    #[test]
    fn singular_burn_in_warns() {
        let mut m = simulate_gaussian(&DMatrix::identity(2, 2), 30, 6).unwrap().returns().clone();
        for t in 0..30 {
            m[(t, 1)] = 2.0 * m[(t, 0)];
        }
        let cov = ewma_covariance(&ReturnPanel::from_matrix(m).unwrap(), 0.94, 5).unwrap();
        assert_eq!(cov.warnings.len(), 1);
    }
}
