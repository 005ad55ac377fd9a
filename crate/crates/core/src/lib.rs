#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately treats NaN as failing.

//! Multi-asset spillover analytics: R²-decomposition connectedness,
//! conditional covariances, bilateral hedging and multivariate portfolios.

pub mod condcov;
pub mod error;
pub mod hedge;
pub mod ingest;
pub mod linalg;
pub mod portfolio;
pub mod r2conn;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use ingest::{PricePanel, ReturnPanel};
pub use stats::CorrMethod;
