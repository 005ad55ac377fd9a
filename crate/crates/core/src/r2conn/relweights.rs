//! Relative-weights attribution of a regression R² via the symmetric square
//! root of the regressor correlation matrix.
//!
//! With `R_X = V Δ V'` and `Λ = V Δ^{1/2} V'`, the regression of `y` on the
//! orthogonalised regressors has coefficients `β = Λ⁻¹ r_Xy`, and regressor
//! `j` is credited `ε_j = Σ_m Λ[j][m]² β[m]²`. Because the columns of `Λ`
//! have unit norm, `Σ_j ε_j = r_Xy' R_X⁻¹ r_Xy`, the R² of the regression.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::stats::{correlation_of_columns, CorrMethod};

/// Condition number above which the correlation matrix gets a ridge.
pub const MAX_CONDITION: f64 = 1e12;
/// Diagonal ridge added once to an ill-conditioned correlation matrix.
pub const RIDGE: f64 = 1e-8;
/// Eigenvalue floor applied to rank-based correlation matrices.
pub const PSD_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeWeights {
    /// Nonnegative share of explained variance per regressor.
    pub weights: Vec<f64>,
    /// Sum of the shares.
    pub r_squared: f64,
    pub ridge_applied: bool,
}

/// Attribution from a precomputed regressor correlation matrix `rxx` and
/// regressor/response correlations `rxy`.
pub fn relative_weights_from_corr(
    rxx: &DMatrix<f64>,
    rxy: &DVector<f64>,
    method: CorrMethod,
) -> Result<RelativeWeights> {
    let m = rxx.nrows();
    if rxx.ncols() != m || rxy.len() != m {
        return Err(Error::InvalidInput(format!(
            "correlation matrix is {}×{} but there are {} response correlations",
            rxx.nrows(),
            rxx.ncols(),
            rxy.len()
        )));
    }
    let mut rxx = match method {
        CorrMethod::Pearson => linalg::symmetrize(rxx),
        _ => linalg::clip_to_psd(rxx, PSD_FLOOR),
    };
    let mut eig = linalg::eigen(&rxx);
    let mut ridge_applied = false;
    if linalg::condition_number(&eig.eigenvalues) > MAX_CONDITION {
        for i in 0..m {
            rxx[(i, i)] += RIDGE;
        }
        eig = linalg::eigen(&rxx);
        ridge_applied = true;
        if linalg::condition_number(&eig.eigenvalues) > MAX_CONDITION {
            return Err(Error::NotPositiveDefinite(
                "regressor correlation matrix ill-conditioned after ridge".into(),
            ));
        }
    }
    let v = &eig.eigenvectors;
    let sqrt = eig.eigenvalues.map(f64::sqrt);
    let inv_sqrt = sqrt.map(|s| 1.0 / s);
    let lambda = v * DMatrix::from_diagonal(&sqrt) * v.transpose();
    let lambda_inv = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    let beta = lambda_inv * rxy;
    let beta2 = beta.map(|b| b * b);
    let weights: Vec<f64> = (0..m)
        .map(|j| (0..m).map(|c| lambda[(j, c)] * lambda[(j, c)] * beta2[c]).sum())
        .collect();
    let r_squared = weights.iter().sum();
    Ok(RelativeWeights {
        weights,
        r_squared,
        ridge_applied,
    })
}

/// Attribution of the R² of `y` on the columns of `x`.
pub fn relative_weights(x: &DMatrix<f64>, y: &DVector<f64>, method: CorrMethod) -> Result<RelativeWeights> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidInput(format!(
            "design has {} rows but response has {}",
            x.nrows(),
            y.len()
        )));
    }
    let m = x.ncols();
    let mut columns: Vec<Vec<f64>> = x.column_iter().map(|c| c.iter().copied().collect()).collect();
    columns.push(y.iter().copied().collect());
    let corr = correlation_of_columns(&columns, method)?;
    let rxx = corr.view((0, 0), (m, m)).into_owned();
    let rxy = corr.view((0, m), (m, 1)).column(0).into_owned();
    relative_weights_from_corr(&rxx, &rxy, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn orthogonal_regressors_get_squared_correlations() {
        // Columns of a Hadamard-like design are exactly orthogonal and centered.
        let x = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        );
        let y = DVector::from_vec(vec![3.0, 1.0, 0.5, -4.5]);
        let rw = relative_weights(&x, &y, CorrMethod::Pearson).unwrap();
        let yc: Vec<f64> = y.iter().copied().collect();
        for j in 0..2 {
            let xc: Vec<f64> = x.column(j).iter().copied().collect();
            let r = correlation_of_columns(&[xc, yc.clone()], CorrMethod::Pearson).unwrap()[(0, 1)];
            assert!((rw.weights[j] - r * r).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_fit_single_regressor() {
        let x = DMatrix::from_column_slice(5, 1, &[1.0, 3.0, 2.0, 5.0, 4.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 2.0, 5.0, 4.0]);
        let rw = relative_weights(&x, &y, CorrMethod::Pearson).unwrap();
        assert!((rw.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let x = DMatrix::zeros(5, 2);
        let y = DVector::zeros(4);
        assert!(matches!(relative_weights(&x, &y, CorrMethod::Pearson), Err(Error::InvalidInput(_))));
        let r = relative_weights_from_corr(&DMatrix::identity(2, 2), &DVector::zeros(3), CorrMethod::Pearson);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn collinear_regressors_get_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = DMatrix::from_fn(50, 2, |r, _| a[r]);
        let rw = relative_weights(&x, &DVector::from_vec(y), CorrMethod::Pearson).unwrap();
        assert!(rw.ridge_applied);
        assert!(rw.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn rank_methods_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(80, 4, |_, _| StandardNormal.sample(&mut rng));
        let y = DVector::from_fn(80, |r, _| x[(r, 0)] + 0.5 * x[(r, 2)] + (r as f64).sin());
        for method in [CorrMethod::Spearman, CorrMethod::Kendall] {
            let rw = relative_weights(&x, &y, method).unwrap();
            assert!(rw.weights.iter().all(|&w| w >= 0.0));
        }
    }
}
