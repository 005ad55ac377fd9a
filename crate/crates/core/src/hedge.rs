//! Bilateral hedge ratios, two-asset portfolio weights and hedging
//! effectiveness.
//!
//! Ratios and weights observed at `t - 1` are applied to returns at `t`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::condcov::ConditionalCovariances;
use crate::error::{Error, Result};
use crate::ingest::{contiguous_rows, DatedSeries, ReturnPanel};
use crate::linalg::{self, SeriesSummary};

/// Minimum series length for the hedging-effectiveness test.
pub const MIN_HE_OBS: usize = 30;

fn check_pair(cov: &ConditionalCovariances, i: usize, j: usize) -> Result<()> {
    let k = cov.n_assets();
    if i >= k || j >= k {
        return Err(Error::InvalidInput(format!("asset pair ({i}, {j}) out of range for {k} assets")));
    }
    Ok(())
}

/// `β_{ij,t} = Σ_{ij,t} / Σ_{jj,t}`.
pub fn hedge_ratio_series(cov: &ConditionalCovariances, i: usize, j: usize) -> Result<Vec<f64>> {
    check_pair(cov, i, j)?;
    cov.sigmas
        .iter()
        .zip(&cov.dates)
        .map(|(s, d)| {
            let v = s[(j, j)];
            if !(v > 0.0) {
                return Err(Error::ZeroVariance(format!("conditional variance of {} on {d}", cov.assets[j])));
            }
            Ok(if i == j { 1.0 } else { s[(i, j)] / v })
        })
        .collect()
}

/// Unclamped weight of `i` in the minimum-variance `i`/`j` portfolio.
pub fn bilateral_weight_raw(s_ii: f64, s_ij: f64, s_jj: f64) -> Option<f64> {
    let den = s_ii - 2.0 * s_ij + s_jj;
    (den > 0.0).then(|| (s_jj - s_ij) / den)
}

pub fn clamp_weight(w: f64) -> f64 {
    w.clamp(0.0, 1.0)
}

/// Clamped weight of asset `i` in a one-dollar `i`/`j` portfolio.
pub fn bilateral_weight_series(cov: &ConditionalCovariances, i: usize, j: usize) -> Result<Vec<f64>> {
    check_pair(cov, i, j)?;
    cov.sigmas
        .iter()
        .zip(&cov.dates)
        .map(|(s, d)| {
            bilateral_weight_raw(s[(i, i)], s[(i, j)], s[(j, j)])
                .map(clamp_weight)
                .ok_or_else(|| Error::NotPositiveDefinite(format!("non-positive pair variance denominator on {d}")))
        })
        .collect()
}

/// Applies a per-date series lagged one period: output at date `t_s` uses
/// `series[s - 1]` and the panel returns at `t_s`.
fn lagged_combination(
    panel: &ReturnPanel,
    dates: &[chrono::NaiveDate],
    series: &[f64],
    f: impl Fn(f64, &[f64]) -> f64,
) -> Result<DatedSeries> {
    if dates.len() != series.len() {
        return Err(Error::DateMisalignment(format!("{} dates for {} values", dates.len(), series.len())));
    }
    let rows = contiguous_rows(panel, dates)?;
    let r = panel.returns();
    let k = panel.n_assets();
    let mut row = vec![0.0; k];
    let values = (1..rows.len())
        .map(|s| {
            for (c, v) in row.iter_mut().enumerate() {
                *v = r[(rows[s], c)];
            }
            f(series[s - 1], &row)
        })
        .collect();
    Ok(DatedSeries {
        dates: dates[1..].to_vec(),
        values,
    })
}

/// `r_{i,t} - β_{ij,t-1} r_{j,t}`.
pub fn hedged_returns(
    panel: &ReturnPanel,
    dates: &[chrono::NaiveDate],
    betas: &[f64],
    i: usize,
    j: usize,
) -> Result<DatedSeries> {
    lagged_combination(panel, dates, betas, |b, r| r[i] - b * r[j])
}

/// `w_{ij,t-1} r_{i,t} + (1 - w_{ij,t-1}) r_{j,t}`.
pub fn paired_portfolio_returns(
    panel: &ReturnPanel,
    dates: &[chrono::NaiveDate],
    weights: &[f64],
    i: usize,
    j: usize,
) -> Result<DatedSeries> {
    lagged_combination(panel, dates, weights, |w, r| w * r[i] + (1.0 - w) * r[j])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeEffect {
    /// `1 - var(r_p) / var(r_ref)`.
    pub he: f64,
    /// One-sided F test of `var(r_ref) > var(r_p)`.
    pub pvalue: f64,
}

pub fn hedging_effectiveness(portfolio: &[f64], reference: &[f64]) -> Result<HedgeEffect> {
    if portfolio.len() != reference.len() {
        return Err(Error::DateMisalignment(format!(
            "portfolio has {} returns, reference {}",
            portfolio.len(),
            reference.len()
        )));
    }
    let n = portfolio.len();
    if n < MIN_HE_OBS {
        return Err(Error::InsufficientData {
            required: MIN_HE_OBS,
            available: n,
        });
    }
    let var_ref = linalg::variance(reference);
    if !(var_ref > 0.0) {
        return Err(Error::ZeroVariance("reference asset returns".into()));
    }
    let var_p = linalg::variance(portfolio);
    let he = 1.0 - var_p / var_ref;
    let pvalue = if var_p > 0.0 {
        let dof = (n - 1) as f64;
        let f = FisherSnedecor::new(dof, dof).expect("valid F distribution");
        (1.0 - f.cdf(var_ref / var_p)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(HedgeEffect { he, pvalue })
}

/// Panel returns of asset `k` on `dates`.
pub(crate) fn asset_returns_on(panel: &ReturnPanel, dates: &[chrono::NaiveDate], k: usize) -> Result<Vec<f64>> {
    dates
        .iter()
        .map(|d| {
            panel
                .position(*d)
                .map(|row| panel.returns()[(row, k)])
                .ok_or_else(|| Error::DateMisalignment(format!("{d} not in return panel")))
        })
        .collect()
}

/// One Table-2 row for the ordered pair `i/j`, in both hedging variants.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeSummary {
    pub pair: (usize, usize),
    pub label: String,
    pub ratios: Vec<f64>,
    pub weights: Vec<f64>,
    pub ratio_stats: SeriesSummary,
    pub weight_stats: SeriesSummary,
    /// Long `i`, short `β` of `j`, against holding `i`.
    pub ratio_he: HedgeEffect,
    /// `w`-weighted `i`/`j` portfolio, against holding `i`.
    pub weight_he: HedgeEffect,
}

pub fn hedge_summary(panel: &ReturnPanel, cov: &ConditionalCovariances, i: usize, j: usize) -> Result<HedgeSummary> {
    let ratios = hedge_ratio_series(cov, i, j)?;
    let weights = bilateral_weight_series(cov, i, j)?;
    let hedged = hedged_returns(panel, &cov.dates, &ratios, i, j)?;
    let paired = paired_portfolio_returns(panel, &cov.dates, &weights, i, j)?;
    let reference = asset_returns_on(panel, &hedged.dates, i)?;
    Ok(HedgeSummary {
        pair: (i, j),
        label: format!("{}/{}", cov.assets[i], cov.assets[j]),
        ratio_stats: linalg::summarize(&ratios),
        weight_stats: linalg::summarize(&weights),
        ratio_he: hedging_effectiveness(&hedged.values, &reference)?,
        weight_he: hedging_effectiveness(&paired.values, &reference)?,
        ratios,
        weights,
    })
}

/// Summaries for all `K (K - 1)` ordered pairs, row-major by `i` then `j`.
pub fn hedge_table(panel: &ReturnPanel, cov: &ConditionalCovariances) -> Result<Vec<HedgeSummary>> {
    let k = cov.n_assets();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    pairs.par_iter().map(|&(i, j)| hedge_summary(panel, cov, i, j)).collect()
}

/// `β_{ij} β_{ji}` for one covariance matrix; equals the squared correlation.
pub fn ratio_product(sigma: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (sigma[(i, j)] / sigma[(j, j)]) * (sigma[(j, i)] / sigma[(i, i)])
}
