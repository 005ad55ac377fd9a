//! Seeded synthetic data: VAR(1) return panels, GARCH(1,1) series,
//! constant-correlation Gaussian panels and the bundled 9-asset fixture.
//!
//! Everything here is driven by `ChaCha8Rng`, so a seed reproduces the same
//! numbers on every platform.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingest::{PricePanel, ReturnPanel};

const BURN_IN: usize = 100;

/// `x_t = A x_{t-1} + B e_t` with standard normal `e_t`, scaled by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    pub coefficients: DMatrix<f64>,
    pub impact: DMatrix<f64>,
    pub scale: f64,
}

impl VarSpec {
    /// Mildly persistent, weakly coupled system.
    pub fn stationary(k: usize) -> Self {
        let coefficients = DMatrix::from_fn(k, k, |i, j| if i == j { 0.2 } else if j + 1 == i { 0.1 } else { 0.0 });
        let impact = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else if j == 0 { 0.3 } else { 0.0 });
        Self {
            coefficients,
            impact,
            scale: 0.01,
        }
    }

    /// Asset 0 drives assets 1 and 2 through both lagged and same-day
    /// loadings; the remaining assets are independent AR(1) noise.
    pub fn planted(k: usize) -> Self {
        assert!(k >= 3, "planted system needs at least 3 assets");
        let mut coefficients = DMatrix::from_fn(k, k, |i, j| if i == j { 0.05 } else { 0.0 });
        coefficients[(1, 0)] = 0.5;
        coefficients[(2, 0)] = 0.5;
        let mut impact = DMatrix::identity(k, k);
        impact[(1, 0)] = 0.8;
        impact[(2, 0)] = 0.8;
        Self {
            coefficients,
            impact,
            scale: 0.01,
        }
    }
}

fn normals(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
    DVector::from_fn(k, |_, _| StandardNormal.sample(rng))
}

pub fn simulate_var1(spec: &VarSpec, rows: usize, seed: u64) -> Result<ReturnPanel> {
    let k = spec.coefficients.nrows();
    if spec.coefficients.shape() != (k, k) || spec.impact.shape() != (k, k) {
        return Err(Error::InvalidInput("VAR coefficient and impact matrices must be K×K".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DVector::zeros(k);
    let mut out = DMatrix::zeros(rows, k);
    for t in 0..rows + BURN_IN {
        x = &spec.coefficients * &x + &spec.impact * normals(&mut rng, k);
        if t >= BURN_IN {
            out.set_row(t - BURN_IN, &(&x * spec.scale).transpose());
        }
    }
    ReturnPanel::from_matrix(out)
}

/// GARCH(1,1) returns with Gaussian innovations, started at the unconditional
/// variance.
pub fn simulate_garch11(omega: f64, alpha: f64, beta: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = omega / (1.0 - alpha - beta);
    let mut out = Vec::with_capacity(n);
    for t in 0..n + BURN_IN {
        let e: f64 = StandardNormal.sample(&mut rng);
        let r = h.sqrt() * e;
        if t >= BURN_IN {
            out.push(r);
        }
        h = omega + alpha * r * r + beta * h;
    }
    out
}

/// I.i.d. Gaussian rows with covariance `cov`.
pub fn simulate_gaussian(cov: &DMatrix<f64>, n: usize, seed: u64) -> Result<ReturnPanel> {
    let k = cov.nrows();
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("simulation covariance".into()))?;
    let l = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, k);
    for t in 0..n {
        out.set_row(t, &(&l * normals(&mut rng, k)).transpose());
    }
    ReturnPanel::from_matrix(out)
}

/// Equicorrelated unit-variance covariance matrix scaled to `sd`.
pub fn equicorrelated(k: usize, rho: f64, sd: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| if i == j { sd * sd } else { rho * sd * sd })
}

pub const FIXTURE_ASSETS: [&str; 9] = ["ETF1", "ETF2", "TOK1", "TOK2", "TOK3", "TOK4", "TOK5", "BOND", "CLEAN"];
pub const FIXTURE_ROWS: usize = 1000;

/// The 9-asset, 1000-return synthetic fixture as a price panel (1001 rows).
///
/// Two "ETF" assets and a "clean energy" asset lead the rest; the five "tokens"
/// share a common factor with higher volatility; each asset carries
/// GARCH(1,1) volatility clustering.
pub fn synthetic_fixture(seed: u64) -> PricePanel {
    let k = FIXTURE_ASSETS.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol: [f64; 9] = [0.012, 0.011, 0.05, 0.045, 0.048, 0.05, 0.055, 0.005, 0.013];
    let mut coefficients = DMatrix::from_fn(k, k, |i, j| if i == j { 0.03 } else { 0.0 });
    for tok in 2..7 {
        coefficients[(tok, 0)] = 0.15;
        coefficients[(tok, 8)] = 0.10;
    }
    coefficients[(7, 8)] = 0.08;
    coefficients[(1, 0)] = 0.10;
    let (omega_scale, alpha, beta) = (0.05, 0.08, 0.90);

    let mut h = vec![1.0f64; k];
    let mut x = DVector::zeros(k);
    let mut prices = DMatrix::zeros(FIXTURE_ROWS + 1, k);
    for j in 0..k {
        prices[(0, j)] = 100.0;
    }
    for t in 0..FIXTURE_ROWS + BURN_IN {
        let z = normals(&mut rng, k);
        let etf_factor: f64 = StandardNormal.sample(&mut rng);
        let token_factor: f64 = StandardNormal.sample(&mut rng);
        let mut e = DVector::zeros(k);
        for j in 0..k {
            let common = match j {
                0 | 1 | 8 => 0.8 * etf_factor,
                2..=6 => 0.8 * token_factor + 0.3 * etf_factor,
                _ => 0.2 * etf_factor,
            };
            e[j] = h[j].sqrt() * (common + 0.6 * z[j]);
            h[j] = omega_scale + alpha * e[j] * e[j] + beta * h[j];
        }
        x = &coefficients * &x + e;
        if t >= BURN_IN {
            let row = t - BURN_IN + 1;
            for j in 0..k {
                let r = (vol[j] * x[j]).clamp(-0.5, 0.5);
                prices[(row, j)] = prices[(row - 1, j)] * r.exp();
            }
        }
    }
    let start = NaiveDate::from_ymd_opt(2021, 5, 25).expect("valid date");
    let dates = (0..=FIXTURE_ROWS).map(|i| start + chrono::Days::new(i as u64)).collect();
    PricePanel::new(dates, FIXTURE_ASSETS.iter().map(|s| s.to_string()).collect(), prices)
        .expect("fixture prices are positive")
}
