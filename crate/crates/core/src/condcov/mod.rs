//! Time-varying covariance matrices: RiskMetrics EWMA and two-stage
//! DCC-GARCH(1,1).

mod dcc;
mod ewma;
mod garch;
mod simplex;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use dcc::{dcc_fit, DccFit};
pub use ewma::{ewma_covariance, DEFAULT_BURN_IN, DEFAULT_LAMBDA};
pub use garch::{garch11_fit, garch11_variances, GarchFit, GarchParams};
pub use simplex::{nelder_mead, Minimum};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerated asymmetry of an emitted matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in an emitted matrix.
pub const PSD_TOL: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Estimator {
    Ewma {
        lambda: f64,
        burn_in: usize,
    },
    Dcc {
        garch: Vec<GarchParams>,
        dcc_a: f64,
        dcc_b: f64,
        converged: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCovariances {
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    pub sigmas: Vec<DMatrix<f64>>,
    pub estimator: Estimator,
    pub warnings: Vec<String>,
}

impl ConditionalCovariances {
    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// `diag(Σ_t)^{-1/2} Σ_t diag(Σ_t)^{-1/2}`.
    pub fn correlation(&self, t: usize) -> Result<DMatrix<f64>> {
        linalg::cov_to_corr(&self.sigmas[t])
    }

    /// Checks symmetry and positive semi-definiteness of every matrix.
    pub fn validate(&self) -> Result<()> {
        for (t, s) in self.sigmas.iter().enumerate() {
            let asym = (s - s.transpose()).abs().max();
            if asym > SYMMETRY_TOL {
                return Err(Error::NotPositiveDefinite(format!("Σ at {} asymmetric by {asym:e}", self.dates[t])));
            }
            let min = linalg::min_eigenvalue(s);
            if min < PSD_TOL {
                return Err(Error::NotPositiveDefinite(format!(
                    "Σ at {} has eigenvalue {min:e}",
                    self.dates[t]
                )));
            }
        }
        Ok(())
    }

    /// Keeps only dates on or after `start`.
    pub fn from_date(&self, start: NaiveDate) -> ConditionalCovariances {
        let first = self.dates.partition_point(|d| *d < start);
        ConditionalCovariances {
            dates: self.dates[first..].to_vec(),
            assets: self.assets.clone(),
            sigmas: self.sigmas[first..].to_vec(),
            estimator: self.estimator.clone(),
            warnings: self.warnings.clone(),
        }
    }
}
