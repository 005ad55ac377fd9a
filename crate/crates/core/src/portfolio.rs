//! Minimum-variance, minimum-correlation and minimum-connectedness portfolios,
//! realized returns and performance metrics.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::condcov::ConditionalCovariances;
use crate::error::{Error, Result};
use crate::hedge::{asset_returns_on, hedging_effectiveness, HedgeEffect};
use crate::ingest::{contiguous_rows, DatedSeries, ReturnPanel};
use crate::linalg::{self, SeriesSummary};
use crate::r2conn::{pci_matrix, PciVariant, WindowRecord};

/// Diagonal ridge used when a matrix cannot be inverted as is.
pub const RIDGE: f64 = 1e-10;
pub const TRADING_DAYS: f64 = 252.0;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "mvp")]
    Mvp,
    #[serde(rename = "mcp")]
    Mcp,
    #[serde(rename = "mcop")]
    Mcop,
    #[serde(rename = "mcop_c")]
    McopC,
    #[serde(rename = "mcop_l")]
    McopL,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::Mvp, Strategy::Mcp, Strategy::Mcop, Strategy::McopC, Strategy::McopL];

    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Mvp => "MVP",
            Strategy::Mcp => "MCP",
            Strategy::Mcop => "MCoP",
            Strategy::McopC => "MCoP^C",
            Strategy::McopL => "MCoP^L",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Strategy::Mvp => "mvp",
            Strategy::Mcp => "mcp",
            Strategy::Mcop => "mcop",
            Strategy::McopC => "mcop_c",
            Strategy::McopL => "mcop_l",
        }
    }

    /// PCI variant for the connectedness strategies.
    pub fn pci_variant(self) -> Option<PciVariant> {
        match self {
            Strategy::Mcop => Some(PciVariant::Total),
            Strategy::McopC => Some(PciVariant::Contemporaneous),
            Strategy::McopL => Some(PciVariant::Lagged),
            _ => None,
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.key() == s)
            .ok_or_else(|| format!("unknown strategy {s:?} (expected one of mvp, mcp, mcop, mcop_c, mcop_l)"))
    }
}

/// Sets negative weights to zero and rescales to unit sum (one pass).
fn long_only(mut w: DVector<f64>) -> DVector<f64> {
    if w.iter().any(|&v| v < 0.0) {
        w.iter_mut().for_each(|v| *v = v.max(0.0));
        let s = linalg::ordered_sum(w.iter().copied());
        w /= s;
    }
    w
}

/// `M⁻¹ 1 / (1' M⁻¹ 1)`, optionally long-only.
pub fn inverse_weights(m: &DMatrix<f64>, long: bool) -> Result<DVector<f64>> {
    let k = m.nrows();
    if k == 0 || m.ncols() != k {
        return Err(Error::InvalidInput("weight matrix must be square and nonempty".into()));
    }
    let x = linalg::solve_ones(m, RIDGE)?;
    let s = linalg::ordered_sum(x.iter().copied());
    if !(s.abs() > 0.0) || !s.is_finite() {
        return Err(Error::NotPositiveDefinite("1' M⁻¹ 1 is zero".into()));
    }
    // w_i = 1 / Σ_j (x_j / x_i): entries that are equal in x come out exactly
    // equal, e.g. 1/K each for exchangeable assets.
    let w = x.map(|xi| if xi == 0.0 { 0.0 } else { 1.0 / linalg::ordered_sum(x.iter().map(|xj| xj / xi)) });
    Ok(if long { long_only(w) } else { w })
}

pub fn mvp_weights(sigma: &DMatrix<f64>, long: bool) -> Result<DVector<f64>> {
    inverse_weights(sigma, long)
}

/// Minimum-correlation weights from the correlation implied by `sigma`.
pub fn mcp_weights(sigma: &DMatrix<f64>, long: bool) -> Result<DVector<f64>> {
    inverse_weights(&linalg::cov_to_corr(sigma)?, long)
}

/// Minimum-connectedness weights from a pairwise connectedness matrix.
pub fn mcop_weights(pci: &DMatrix<f64>, long: bool) -> Result<DVector<f64>> {
    let k = pci.nrows();
    for i in 0..k {
        if pci[(i, i)] != 1.0 {
            return Err(Error::InvalidInput("PCI must have unit diagonal".into()));
        }
        for j in 0..k {
            let v = pci[(i, j)];
            if !(0.0..=1.0).contains(&v) || v != pci[(j, i)] {
                return Err(Error::InvalidInput(format!("PCI entry ({i}, {j}) = {v} not symmetric in [0, 1]")));
            }
        }
    }
    inverse_weights(pci, long)
}

/// One matrix per date; `None` marks a date without an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSequence {
    pub dates: Vec<NaiveDate>,
    pub matrices: Vec<Option<DMatrix<f64>>>,
}

impl MatrixSequence {
    pub fn from_covariances(cov: &ConditionalCovariances) -> Self {
        Self {
            dates: cov.dates.clone(),
            matrices: cov.sigmas.iter().cloned().map(Some).collect(),
        }
    }

    pub fn from_rolling(records: &[WindowRecord], variant: PciVariant) -> Self {
        Self {
            dates: records.iter().map(|r| r.end_date).collect(),
            matrices: records.iter().map(|r| r.result().map(|(d, _)| pci_matrix(d, variant))).collect(),
        }
    }

    /// Re-indexes onto `dates`; dates without an entry become gaps.
    pub fn on_dates(&self, dates: &[NaiveDate]) -> Self {
        Self {
            dates: dates.to_vec(),
            matrices: dates
                .iter()
                .map(|d| self.dates.binary_search(d).ok().and_then(|i| self.matrices[i].clone()))
                .collect(),
        }
    }

    /// Restricts to dates on or after `start`.
    pub fn from_date(&self, start: NaiveDate) -> Self {
        let first = self.dates.partition_point(|d| *d < start);
        Self {
            dates: self.dates[first..].to_vec(),
            matrices: self.matrices[first..].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTrajectory {
    pub strategy: Strategy,
    pub dates: Vec<NaiveDate>,
    /// One row per date, summing to one.
    pub weights: DMatrix<f64>,
    pub long_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub trajectory: WeightTrajectory,
    pub returns: DatedSeries,
    /// Dates whose weights were carried forward from the previous date.
    pub carried_forward: Vec<NaiveDate>,
}

fn weights_for(strategy: Strategy, m: &DMatrix<f64>, long: bool) -> Result<DVector<f64>> {
    match strategy {
        Strategy::Mvp => mvp_weights(m, long),
        Strategy::Mcp => mcp_weights(m, long),
        Strategy::Mcop | Strategy::McopC | Strategy::McopL => mcop_weights(m, long),
    }
}

/// Recomputes weights at each date from that date's matrix and earns the next
/// date's returns with them. Dates without a usable matrix reuse the previous
/// weights; leading such dates are dropped.
pub fn run_strategy(panel: &ReturnPanel, inputs: &MatrixSequence, strategy: Strategy, long: bool) -> Result<StrategyRun> {
    let k = panel.n_assets();
    let mut dates = Vec::new();
    let mut rows: Vec<DVector<f64>> = Vec::new();
    let mut carried_forward = Vec::new();
    let mut first_error = None;
    for (date, m) in inputs.dates.iter().zip(&inputs.matrices) {
        let fresh = match m {
            Some(m) if m.nrows() != k => {
                return Err(Error::InvalidInput(format!("{}×{} matrix for {k} assets", m.nrows(), m.ncols())))
            }
            Some(m) => weights_for(strategy, m, long).map_err(|e| {
                let e = e.for_window(*date);
                first_error.get_or_insert(e.clone());
                e
            }),
            None => Err(Error::AllGaps),
        };
        match (fresh, rows.last()) {
            (Ok(w), _) => {
                dates.push(*date);
                rows.push(w);
            }
            (Err(_), Some(prev)) => {
                let prev = prev.clone();
                dates.push(*date);
                rows.push(prev);
                carried_forward.push(*date);
            }
            (Err(_), None) => {}
        }
    }
    if rows.is_empty() {
        return Err(first_error.unwrap_or(Error::AllGaps));
    }
    let weights = DMatrix::from_fn(rows.len(), k, |t, j| rows[t][j]);
    let panel_rows = contiguous_rows(panel, &dates)?;
    let r = panel.returns();
    let values = (1..panel_rows.len())
        .map(|s| (0..k).map(|j| weights[(s - 1, j)] * r[(panel_rows[s], j)]).sum())
        .collect();
    Ok(StrategyRun {
        returns: DatedSeries {
            dates: dates[1..].to_vec(),
            values,
        },
        trajectory: WeightTrajectory {
            strategy,
            dates,
            weights,
            long_only: long,
        },
        carried_forward,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    /// Mean return, annualized when requested.
    pub mean: f64,
    pub std_dev: f64,
    /// `None` marks an undefined ratio (zero volatility or non-positive tail risk).
    pub sharpe_std: Option<f64>,
    pub sharpe_var: Option<f64>,
    pub sharpe_cvar: Option<f64>,
    /// Daily value-at-risk and expected shortfall at level `alpha`, as positive losses.
    pub var: f64,
    pub cvar: f64,
    pub alpha: f64,
    pub annualization: f64,
    /// Running sum of returns, starting at 0.
    pub cumulative: Vec<f64>,
}

/// Reward-to-risk summary with zero risk-free rate.
pub fn performance(returns: &[f64], alpha: f64, annualize: bool) -> Result<PerformanceReport> {
    let n = returns.len();
    if n < 30 {
        return Err(Error::InsufficientData {
            required: 30,
            available: n,
        });
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidInput(format!("alpha {alpha} outside (0, 0.5)")));
    }
    let factor = if annualize { TRADING_DAYS } else { 1.0 };
    let mean = factor * linalg::mean(returns);
    let std_dev = factor.sqrt() * linalg::std_dev(returns);
    let mut sorted = returns.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = linalg::quantile_sorted(&sorted, alpha);
    let tail: Vec<f64> = sorted.iter().copied().take_while(|&r| r <= q).collect();
    let var = -q;
    let cvar = -linalg::mean(&tail);
    let flat = linalg::is_constant(returns);
    let ratio = |risk: f64| (!flat && risk > 0.0).then(|| mean / (factor.sqrt() * risk));
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for r in returns {
        acc += r;
        cumulative.push(acc);
    }
    Ok(PerformanceReport {
        mean,
        std_dev,
        sharpe_std: (!flat && std_dev > 0.0).then(|| mean / std_dev),
        sharpe_var: ratio(var),
        sharpe_cvar: ratio(cvar),
        var,
        cvar,
        alpha,
        annualization: factor,
        cumulative,
    })
}

/// Hedging effectiveness of the strategy against holding each asset alone.
pub fn portfolio_he(returns: &DatedSeries, panel: &ReturnPanel) -> Result<Vec<HedgeEffect>> {
    (0..panel.n_assets())
        .map(|k| {
            let asset = asset_returns_on(panel, &returns.dates, k)?;
            hedging_effectiveness(&returns.values, &asset).map_err(|e| e.for_asset(k))
        })
        .collect()
}

/// Table-3 block: weight summary and HE per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationRow {
    pub asset: String,
    pub weight: SeriesSummary,
    pub he: HedgeEffect,
}

pub fn allocation_table(run: &StrategyRun, panel: &ReturnPanel) -> Result<Vec<AllocationRow>> {
    let he = portfolio_he(&run.returns, panel)?;
    Ok(panel
        .assets()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let col: Vec<f64> = run.trajectory.weights.column(k).iter().copied().collect();
            AllocationRow {
                asset: name.clone(),
                weight: linalg::summarize(&col),
                he: he[k],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condcov::ewma_covariance;
    use crate::r2conn::{rolling_connectedness, RollingConfig, SpilloverDecomposition};
    use crate::simulate::{equicorrelated, simulate_gaussian, simulate_var1, VarSpec};

    fn close(a: &DVector<f64>, b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn mvp_examples() {
        assert!(close(&mvp_weights(&DMatrix::identity(4, 4), true).unwrap(), &[0.25; 4], 0.0 + 1e-15));
        let w = mvp_weights(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])), true).unwrap();
        assert!(close(&w, &[0.8, 0.2], 1e-15));
        let w = mvp_weights(&equicorrelated(5, 0.5, 1.0), true).unwrap();
        assert!(close(&w, &[0.2; 5], 1e-15));
        assert!(close(&mvp_weights(&DMatrix::from_element(1, 1, 3.0), true).unwrap(), &[1.0], 0.0 + 1e-15));
    }

    #[test]
    fn mvp_long_only_clips() {
        // Strong correlation with unequal variances makes the unconstrained
        // solution short the riskier asset.
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.8, 1.8, 4.0]);
        let raw = mvp_weights(&s, false).unwrap();
        assert!(raw[1] < 0.0);
        let w = mvp_weights(&s, true).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn mcp_examples() {
        let w = mcp_weights(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 9.0, 0.25])), true).unwrap();
        assert!(close(&w, &[1.0 / 3.0; 3], 1e-15));
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 4.0]);
        assert!(close(&mcp_weights(&s, true).unwrap(), &[0.5, 0.5], 1e-15));
        // R⁻¹1 = (1/1.8, 1/1.8, 1) before normalization.
        let r = DMatrix::from_row_slice(3, 3, &[1.0, 0.8, 0.0, 0.8, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let w = mcp_weights(&r, true).unwrap();
        let s = 2.0 / 1.8 + 1.0;
        assert!(close(&w, &[1.0 / 1.8 / s, 1.0 / 1.8 / s, 1.0 / s], 1e-14));
        assert!(w[2] > w[0] && (w[0] - w[1]).abs() < 1e-15);
    }

    #[test]
    fn mcop_examples() {
        assert!(close(&mcop_weights(&DMatrix::identity(3, 3), true).unwrap(), &[1.0 / 3.0; 3], 1e-15));
        let p = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.3 });
        assert!(close(&mcop_weights(&p, true).unwrap(), &[0.25; 4], 1e-15));
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.1, 0.9, 1.0, 0.1, 0.1, 0.1, 1.0]);
        let w = mcop_weights(&p, true).unwrap();
        assert!(w[2] > w[0] && w[2] > w[1]);
        let asymmetric = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(mcop_weights(&asymmetric, true).is_err());
        let off_diagonal = DMatrix::from_row_slice(2, 2, &[0.9, 0.5, 0.5, 1.0]);
        assert!(mcop_weights(&off_diagonal, true).is_err());
    }

    #[test]
    fn mcp_scale_free_mvp_not() {
        let p = simulate_gaussian(&equicorrelated(3, 0.4, 0.01), 200, 1).unwrap();
        let s = linalg::sample_covariance(p.returns());
        let mut scaled = p.returns().clone();
        scaled.column_mut(1).scale_mut(5.0);
        let s2 = linalg::sample_covariance(&scaled);
        let (a, b) = (mcp_weights(&s, false).unwrap(), mcp_weights(&s2, false).unwrap());
        assert!((a - b).abs().max() < 1e-12);
        let (a, b) = (mvp_weights(&s, false).unwrap(), mvp_weights(&s2, false).unwrap());
        assert!((a - b).abs().max() > 1e-3);
    }

    fn constant_sequence(p: &ReturnPanel, s: DMatrix<f64>) -> MatrixSequence {
        MatrixSequence {
            dates: p.dates().to_vec(),
            matrices: vec![Some(s); p.n_obs()],
        }
    }

    #[test]
    fn constant_sigma_constant_weights() {
        let p = simulate_gaussian(&equicorrelated(3, 0.4, 0.01), 100, 2).unwrap();
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 4.0]));
        let run = run_strategy(&p, &constant_sequence(&p, s), Strategy::Mvp, true).unwrap();
        let w0: Vec<f64> = run.trajectory.weights.row(0).iter().copied().collect();
        assert!(run.trajectory.weights.row_iter().all(|r| r.iter().zip(&w0).all(|(a, b)| a == b)));
        assert_eq!(run.returns.len(), 99);
        for (t, v) in run.returns.values.iter().enumerate() {
            let r = p.returns().row(t + 1);
            let expect: f64 = (0..3).map(|j| w0[j] * r[j]).sum();
            assert!((v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn single_asset_strategy() {
        let p = simulate_gaussian(&DMatrix::from_element(1, 1, 1e-4), 50, 3).unwrap();
        let run = run_strategy(&p, &constant_sequence(&p, DMatrix::from_element(1, 1, 1e-4)), Strategy::Mvp, true).unwrap();
        assert!(run.trajectory.weights.iter().all(|&w| w == 1.0));
        assert_eq!(run.returns.values, p.column(0)[1..].to_vec());
    }

    #[test]
    fn full_sample_mvp_beats_each_asset() {
        for seed in 0..10 {
            let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 2.0, -0.2, 0.1, -0.2, 1.5]) * 1e-4;
            let p = simulate_gaussian(&cov, 500, 10 + seed).unwrap();
            let s = linalg::sample_covariance(p.returns());
            let run = run_strategy(&p, &constant_sequence(&p, s), Strategy::Mvp, false).unwrap();
            let vp = linalg::variance(&run.returns.values);
            for k in 0..3 {
                assert!(vp <= linalg::variance(&p.column(k)[1..]));
            }
        }
    }

    #[test]
    fn gaps_carry_forward() {
        let p = simulate_gaussian(&equicorrelated(2, 0.2, 0.01), 40, 4).unwrap();
        let mut seq = constant_sequence(&p, DMatrix::identity(2, 2));
        seq.matrices[0] = None;
        seq.matrices[5] = None;
        seq.matrices[6] = Some(DMatrix::from_element(2, 2, f64::NAN));
        let run = run_strategy(&p, &seq, Strategy::Mvp, true).unwrap();
        assert_eq!(run.trajectory.dates[0], p.dates()[1]);
        assert_eq!(run.carried_forward, vec![p.dates()[5], p.dates()[6]]);
        assert!(run.trajectory.weights.row_iter().all(|r| (r.sum() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn mcop_variants_coincide_without_lags() {
        let c = DMatrix::from_row_slice(3, 3, &[0.0, 40.0, 5.0, 35.0, 0.0, 10.0, 3.0, 12.0, 0.0]);
        let s = SpilloverDecomposition::from_parts(c, DMatrix::zeros(3, 3)).unwrap();
        let total = mcop_weights(&pci_matrix(&s, PciVariant::Total), true).unwrap();
        let contemporaneous = mcop_weights(&pci_matrix(&s, PciVariant::Contemporaneous), true).unwrap();
        assert_eq!(total, contemporaneous);
    }

    #[test]
    fn mcop_from_rolling_runs() {
        let p = simulate_var1(&VarSpec::stationary(3), 120, 5).unwrap();
        let recs = rolling_connectedness(&p, &RollingConfig { window: 60, ..Default::default() }).unwrap();
        for st in [Strategy::Mcop, Strategy::McopC, Strategy::McopL] {
            let seq = MatrixSequence::from_rolling(&recs, st.pci_variant().unwrap());
            let run = run_strategy(&p, &seq, st, true).unwrap();
            assert_eq!(run.trajectory.dates.len(), recs.len());
            assert!(run.trajectory.weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
        }
    }

    #[test]
    fn ewma_strategies_sum_to_one() {
        let p = simulate_gaussian(&equicorrelated(4, 0.3, 0.01), 300, 6).unwrap();
        let cov = ewma_covariance(&p, 0.94, 60).unwrap();
        for st in [Strategy::Mvp, Strategy::Mcp] {
            for long in [true, false] {
                let run = run_strategy(&p, &MatrixSequence::from_covariances(&cov), st, long).unwrap();
                for row in run.trajectory.weights.row_iter() {
                    assert!((row.sum() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn performance_examples() {
        let r = vec![0.001; 40];
        let rep = performance(&r, 0.05, true).unwrap();
        assert_eq!(rep.sharpe_std, None);
        assert_eq!(rep.sharpe_var, None);
        let r: Vec<f64> = (0..40).map(|t| if t % 2 == 0 { -0.01 } else { 0.01 }).collect();
        let rep = performance(&r, 0.05, true).unwrap();
        assert_eq!(rep.mean, 0.0);
        assert_eq!(rep.sharpe_std, Some(0.0));
        assert_eq!(rep.sharpe_var, Some(0.0));
        assert_eq!(rep.sharpe_cvar, Some(0.0));
        assert_eq!(rep.cumulative[0], 0.0);
        assert!(matches!(performance(&r[..10], 0.05, true), Err(Error::InsufficientData { .. })));
        assert!(performance(&r, 0.6, true).is_err());
    }

    #[test]
    fn performance_arithmetic() {
        let r: Vec<f64> = (0..100).map(|t| ((t * 37) % 100) as f64 / 1000.0 - 0.045).collect();
        let rep = performance(&r, 0.05, true).unwrap();
        let m = linalg::mean(&r);
        let s = linalg::std_dev(&r);
        assert!((rep.mean - 252.0 * m).abs() < 1e-12);
        assert!((rep.sharpe_std.unwrap() - 252.0f64.sqrt() * m / s).abs() < 1e-9);
        assert!((rep.sharpe_var.unwrap() - 252.0 * m / (252.0f64.sqrt() * rep.var)).abs() < 1e-9);
        let daily = performance(&r, 0.05, false).unwrap();
        assert!((daily.mean - m).abs() < 1e-15);
        assert!(rep.cvar >= rep.var);
    }

    #[test]
    fn gaussian_var_close_to_quantile() {
        let p = simulate_gaussian(&DMatrix::from_element(1, 1, 1e-4), 1000, 7).unwrap();
        let rep = performance(&p.column(0), 0.05, true).unwrap();
        assert!((rep.var - 0.01645).abs() <= 0.15 * 0.01645, "{}", rep.var);
    }

    #[test]
    fn portfolio_he_examples() {
        let p = simulate_gaussian(&equicorrelated(2, 0.2, 0.01), 100, 8).unwrap();
        let series = DatedSeries {
            dates: p.dates().to_vec(),
            values: p.column(0),
        };
        let he = portfolio_he(&series, &p).unwrap();
        assert_eq!(he[0].he, 0.0);
        let half = DatedSeries {
            dates: p.dates().to_vec(),
            values: p.column(1).iter().map(|v| v / 2f64.sqrt()).collect(),
        };
        assert!((portfolio_he(&half, &p).unwrap()[1].he - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_weight_cumulative_is_linear() {
        let p = simulate_gaussian(&equicorrelated(3, 0.2, 0.01), 100, 9).unwrap();
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let run = run_strategy(&p, &constant_sequence(&p, s), Strategy::Mvp, true).unwrap();
        let rep = performance(&run.returns.values, 0.05, false).unwrap();
        let w: Vec<f64> = run.trajectory.weights.row(0).iter().copied().collect();
        let mut acc = [0.0; 3];
        for (t, c) in rep.cumulative.iter().enumerate().skip(1) {
            for (j, a) in acc.iter_mut().enumerate() {
                *a += p.returns()[(t, j)];
            }
            let expect: f64 = (0..3).map(|j| w[j] * acc[j]).sum();
            assert!((c - expect).abs() < 1e-12);
        }
    }
}
