use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::linalg;

/// One explanatory series: `asset` observed `lag` days before the target row.
/// Lag 0 is contemporaneous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Regressor {
    pub asset: usize,
    pub lag: usize,
}

/// Regressor layout for the regression of asset `target` on the other assets'
/// contemporaneous returns followed by `lag_order` lags of every asset
/// (lag-major, asset order within each lag).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressionDesign {
    pub target: usize,
    pub lag_order: usize,
    pub regressors: Vec<Regressor>,
}

impl RegressionDesign {
    pub fn new(n_assets: usize, target: usize, lag_order: usize) -> Self {
        let mut regressors: Vec<Regressor> = (0..n_assets)
            .filter(|&i| i != target)
            .map(|asset| Regressor { asset, lag: 0 })
            .collect();
        for lag in 1..=lag_order {
            regressors.extend((0..n_assets).map(|asset| Regressor { asset, lag }));
        }
        Self {
            target,
            lag_order,
            regressors,
        }
    }

    pub fn n_regressors(&self) -> usize {
        self.regressors.len()
    }
}

/// Number of regressors for a `k`-asset system with `p` lags.
pub fn regressor_count(k: usize, p: usize) -> usize {
    (k - 1) + p * k
}

/// Minimum window length accepted for a `k`-asset system with `p` lags.
pub fn min_window(k: usize, p: usize) -> usize {
    5 * regressor_count(k, p)
}

pub(crate) fn check_window(n_rows: usize, k: usize, p: usize) -> Result<()> {
    if p < 1 {
        return Err(Error::InvalidInput("lag order must be at least 1".into()));
    }
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 assets, got {k}")));
    }
    let required = min_window(k, p);
    if n_rows < required {
        return Err(Error::WindowTooShort {
            required,
            available: n_rows,
        });
    }
    Ok(())
}

/// Standardized response and design matrices for one regression.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrices {
    pub design: RegressionDesign,
    /// Target returns over window rows `p..T_w`, z-scored.
    pub response: DVector<f64>,
    /// One z-scored column per regressor, in `design.regressors` order.
    pub regressors: DMatrix<f64>,
}

pub fn build_design(window: &ReturnPanel, target: usize, lag_order: usize) -> Result<DesignMatrices> {
    let k = window.n_assets();
    let t_w = window.n_obs();
    check_window(t_w, k, lag_order)?;
    if target >= k {
        return Err(Error::InvalidInput(format!("target {target} out of range for {k} assets")));
    }
    let design = RegressionDesign::new(k, target, lag_order);
    let r = window.returns();
    let rows = t_w - lag_order;
    let series = |asset: usize, lag: usize| -> Vec<f64> {
        (lag_order..t_w).map(|t| r[(t - lag, asset)]).collect()
    };
    let z = |asset: usize, lag: usize| -> Result<Vec<f64>> {
        linalg::standardize(&series(asset, lag)).ok_or_else(|| {
            Error::ZeroVariance(format!("{} lag {lag}", window.assets()[asset]))
        })
    };
    let response = DVector::from_vec(z(target, 0)?);
    let mut regressors = DMatrix::zeros(rows, design.n_regressors());
    for (c, reg) in design.regressors.iter().enumerate() {
        regressors.set_column(c, &DVector::from_vec(z(reg.asset, reg.lag)?));
    }
    Ok(DesignMatrices {
        design,
        response,
        regressors,
    })
}
