use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use super::design::{check_window, RegressionDesign};
use super::relweights::relative_weights_from_corr;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::linalg;
use crate::stats::{correlation_of_columns, CorrMethod};

/// Per-window attribution of each asset's explained variance, in percentage
/// points.
///
/// `contemporaneous[(k, i)]` is the share of asset `k`'s variance credited to
/// asset `i`'s same-day return; `lagged[(k, i)]` sums the shares of all lags of
/// asset `i` (own lags on the diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct SpilloverDecomposition {
    pub contemporaneous: DMatrix<f64>,
    pub lagged: DMatrix<f64>,
    /// R² of each asset's regression, as a fraction.
    pub r_squared: Vec<f64>,
    /// Window end date, when the window came from a dated panel.
    pub label: Option<NaiveDate>,
    pub ridge_applied: bool,
}

impl SpilloverDecomposition {
    pub fn n_assets(&self) -> usize {
        self.contemporaneous.nrows()
    }

    /// `C + L`.
    pub fn total(&self) -> DMatrix<f64> {
        &self.contemporaneous + &self.lagged
    }

    /// Builds a decomposition from raw matrices, checking shape and sign.
    pub fn from_parts(contemporaneous: DMatrix<f64>, lagged: DMatrix<f64>) -> Result<Self> {
        let k = contemporaneous.nrows();
        if contemporaneous.shape() != (k, k) || lagged.shape() != (k, k) {
            return Err(Error::InvalidInput("decomposition matrices must be square and equal-sized".into()));
        }
        if contemporaneous.iter().chain(lagged.iter()).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidInput("attributions must be nonnegative".into()));
        }
        if (0..k).any(|i| contemporaneous[(i, i)] != 0.0) {
            return Err(Error::InvalidInput("contemporaneous diagonal must be zero".into()));
        }
        let r_squared = (0..k)
            .map(|r| (contemporaneous.row(r).sum() + lagged.row(r).sum()) / 100.0)
            .collect();
        Ok(Self {
            contemporaneous,
            lagged,
            r_squared,
            label: None,
            ridge_applied: false,
        })
    }
}

/// Runs the `K` per-asset regressions of one window and routes the attributions
/// into the contemporaneous and lagged matrices.
///
/// All regressions share one correlation matrix of the `K (p + 1)` lagged
/// series, which gives the same result as building each design separately.
///
/// The work is done with the assets sorted by name and mapped back afterwards,
/// so reordering the input columns reorders the output bit for bit.
pub fn decompose_window(window: &ReturnPanel, lag_order: usize, method: CorrMethod) -> Result<SpilloverDecomposition> {
    let k = window.n_assets();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| window.assets()[a].cmp(&window.assets()[b]));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return decompose_ordered(window, lag_order, method);
    }
    let sorted = decompose_ordered(&window.select_columns(&order), lag_order, method).map_err(|e| match e {
        Error::Asset { index, source } => Error::Asset {
            index: order[index],
            source,
        },
        other => other,
    })?;
    // Position of original asset i in the sorted panel.
    let mut rank = vec![0; k];
    for (pos, &orig) in order.iter().enumerate() {
        rank[orig] = pos;
    }
    let back = |m: &DMatrix<f64>| DMatrix::from_fn(k, k, |i, j| m[(rank[i], rank[j])]);
    Ok(SpilloverDecomposition {
        contemporaneous: back(&sorted.contemporaneous),
        lagged: back(&sorted.lagged),
        r_squared: (0..k).map(|i| sorted.r_squared[rank[i]]).collect(),
        label: sorted.label,
        ridge_applied: sorted.ridge_applied,
    })
}

fn decompose_ordered(window: &ReturnPanel, lag_order: usize, method: CorrMethod) -> Result<SpilloverDecomposition> {
    let k = window.n_assets();
    let t_w = window.n_obs();
    check_window(t_w, k, lag_order)?;
    let r = window.returns();

    // Series index for (asset, lag) is lag * k + asset.
    let idx = |asset: usize, lag: usize| lag * k + asset;
    let mut columns = Vec::with_capacity(k * (lag_order + 1));
    for lag in 0..=lag_order {
        for asset in 0..k {
            let col: Vec<f64> = (lag_order..t_w).map(|t| r[(t - lag, asset)]).collect();
            if linalg::is_constant(&col) {
                return Err(Error::ZeroVariance(format!("{} lag {lag}", window.assets()[asset])));
            }
            columns.push(col);
        }
    }
    let corr = correlation_of_columns(&columns, method)?;

    let mut contemporaneous = DMatrix::zeros(k, k);
    let mut lagged = DMatrix::zeros(k, k);
    let mut r_squared = Vec::with_capacity(k);
    let mut ridge_applied = false;
    for target in 0..k {
        let design = RegressionDesign::new(k, target, lag_order);
        let sel: Vec<usize> = design.regressors.iter().map(|g| idx(g.asset, g.lag)).collect();
        let m = sel.len();
        let rxx = DMatrix::from_fn(m, m, |a, b| corr[(sel[a], sel[b])]);
        let rxy = DVector::from_fn(m, |a, _| corr[(sel[a], idx(target, 0))]);
        let rw = relative_weights_from_corr(&rxx, &rxy, method).map_err(|e| e.for_asset(target))?;
        ridge_applied |= rw.ridge_applied;
        for (g, w) in design.regressors.iter().zip(&rw.weights) {
            if g.lag == 0 {
                contemporaneous[(target, g.asset)] += 100.0 * w;
            } else {
                lagged[(target, g.asset)] += 100.0 * w;
            }
        }
        r_squared.push(rw.r_squared);
    }
    Ok(SpilloverDecomposition {
        contemporaneous,
        lagged,
        r_squared,
        label: window.dates().last().copied(),
        ridge_applied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r2conn::design::build_design;
    use crate::r2conn::relweights::relative_weights;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(rows: usize, k: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, k, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn shared_correlation_matches_per_asset_designs() {
        let panel = ReturnPanel::from_matrix(noise(120, 3, 1)).unwrap();
        for method in CorrMethod::ALL {
            let dec = decompose_window(&panel, 2, method).unwrap();
            for target in 0..3 {
                let d = build_design(&panel, target, 2).unwrap();
                let rw = relative_weights(&d.regressors, &d.response, method).unwrap();
                let mut c = [0.0; 3];
                let mut l = [0.0; 3];
                for (g, w) in d.design.regressors.iter().zip(&rw.weights) {
                    if g.lag == 0 { c[g.asset] += 100.0 * w } else { l[g.asset] += 100.0 * w }
                }
                for i in 0..3 {
                    assert!((dec.contemporaneous[(target, i)] - c[i]).abs() < 1e-9, "{method}");
                    assert!((dec.lagged[(target, i)] - l[i]).abs() < 1e-9, "{method}");
                }
            }
        }
    }

    #[test]
    fn row_sums_equal_r_squared() {
        let panel = ReturnPanel::from_matrix(noise(200, 4, 2)).unwrap();
        let dec = decompose_window(&panel, 1, CorrMethod::Pearson).unwrap();
        for k in 0..4 {
            let s = dec.contemporaneous.row(k).sum() + dec.lagged.row(k).sum();
            assert!((s - 100.0 * dec.r_squared[k]).abs() < 1e-8);
            assert_eq!(dec.contemporaneous[(k, k)], 0.0);
        }
        assert!(dec.contemporaneous.iter().chain(dec.lagged.iter()).all(|&v| (0.0..=100.0).contains(&v)));
    }

    #[test]
    fn independent_noise_has_small_spillovers() {
        let ok = (0..100)
            .filter(|&s| {
                let panel = ReturnPanel::from_matrix(noise(200, 3, 100 + s)).unwrap();
                let dec = decompose_window(&panel, 1, CorrMethod::Pearson).unwrap();
                (0..3).all(|k| {
                    (0..3).all(|i| {
                        (i == k || dec.contemporaneous[(k, i)] < 5.0) && (i == k || dec.lagged[(k, i)] < 5.0)
                    })
                })
            })
            .count();
        assert!(ok >= 90, "{ok}");
    }

    #[test]
    fn near_duplicate_pair_dominates() {
        let mut m = noise(200, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for t in 0..200 {
            m[(t, 1)] = m[(t, 0)] + 0.01 * { let z: f64 = StandardNormal.sample(&mut rng); z };
        }
        let dec = decompose_window(&ReturnPanel::from_matrix(m).unwrap(), 1, CorrMethod::Pearson).unwrap();
        let pair = dec.contemporaneous[(1, 0)] + dec.contemporaneous[(0, 1)];
        let total = dec.total();
        let rest: f64 = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && (a, b) != (0, 1) && (a, b) != (1, 0))
            .map(|(a, b)| total[(a, b)])
            .sum::<f64>()
            + dec.lagged[(0, 1)]
            + dec.lagged[(1, 0)];
        assert!(pair > 190.0 && pair > 10.0 * rest, "pair {pair} rest {rest}");
    }

    #[test]
    fn errors_annotated() {
        let panel = ReturnPanel::from_matrix(noise(20, 9, 4)).unwrap();
        assert!(matches!(
            decompose_window(&panel, 1, CorrMethod::Pearson),
            Err(Error::WindowTooShort { .. })
        ));
        let mut m = noise(50, 2, 5);
        m.column_mut(1).fill(0.0);
        let err = decompose_window(&ReturnPanel::from_matrix(m).unwrap(), 1, CorrMethod::Pearson).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(_)));
    }
}
