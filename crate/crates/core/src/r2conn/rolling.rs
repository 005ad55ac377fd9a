use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decompose::{decompose_window, SpilloverDecomposition};
use super::design::check_window;
use super::indices::{directional_indices, DirectionalIndices};
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::stats::CorrMethod;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub window: usize,
    pub step: usize,
    pub lag: usize,
    pub corr_method: CorrMethod,
    pub include_own_lag: bool,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 200,
            step: 1,
            lag: 1,
            corr_method: CorrMethod::Pearson,
            include_own_lag: false,
        }
    }
}

// Gaps are rare, so boxing the common variant would only add indirection.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum WindowOutcome {
    Ok {
        decomposition: SpilloverDecomposition,
        indices: DirectionalIndices,
    },
    /// The window's regressions failed; `reason` carries the error.
    Gap { reason: Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub end_date: NaiveDate,
    pub outcome: WindowOutcome,
}

impl WindowRecord {
    pub fn result(&self) -> Option<(&SpilloverDecomposition, &DirectionalIndices)> {
        match &self.outcome {
            WindowOutcome::Ok { decomposition, indices } => Some((decomposition, indices)),
            WindowOutcome::Gap { .. } => None,
        }
    }
}

/// End-row indices (inclusive) of every window.
pub fn window_ends(n_obs: usize, window: usize, step: usize) -> Vec<usize> {
    if window == 0 || n_obs < window {
        return Vec::new();
    }
    (window - 1..n_obs).step_by(step.max(1)).collect()
}

/// Decomposes every window of `window` rows ending at `window - 1`,
/// `window - 1 + step`, ... Windows run in parallel; output order is by end date.
pub fn rolling_connectedness(panel: &ReturnPanel, config: &RollingConfig) -> Result<Vec<WindowRecord>> {
    if config.step < 1 {
        return Err(Error::InvalidInput("step must be at least 1".into()));
    }
    if panel.n_obs() < config.window {
        return Err(Error::WindowTooShort {
            required: config.window,
            available: panel.n_obs(),
        });
    }
    check_window(config.window, panel.n_assets(), config.lag)?;
    let ends = window_ends(panel.n_obs(), config.window, config.step);
    let records = ends
        .par_iter()
        .map(|&end| {
            let start = end + 1 - config.window;
            let window = panel.rows(start, end + 1);
            let end_date = panel.dates()[end];
            let outcome = match decompose_window(&window, config.lag, config.corr_method) {
                Ok(decomposition) => {
                    let indices = directional_indices(&decomposition, config.include_own_lag);
                    WindowOutcome::Ok { decomposition, indices }
                }
                Err(e) => WindowOutcome::Gap {
                    reason: e.for_window(end_date),
                },
            };
            WindowRecord { end_date, outcome }
        })
        .collect();
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSpillover {
    pub decomposition: SpilloverDecomposition,
    pub indices: DirectionalIndices,
    pub n_windows: usize,
}

fn mean_vec(items: &[&Vec<f64>]) -> Vec<f64> {
    let n = items.len() as f64;
    (0..items[0].len()).map(|i| items.iter().map(|v| v[i]).sum::<f64>() / n).collect()
}

fn mean_mat(items: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let mut acc = DMatrix::zeros(items[0].nrows(), items[0].ncols());
    for m in items {
        acc += *m;
    }
    acc / items.len() as f64
}

/// Element-wise mean over all non-gap windows.
pub fn averaged_spillover(records: &[WindowRecord]) -> Result<AveragedSpillover> {
    let ok: Vec<(&SpilloverDecomposition, &DirectionalIndices)> = records.iter().filter_map(WindowRecord::result).collect();
    if ok.is_empty() {
        return Err(Error::AllGaps);
    }
    let n = ok.len() as f64;
    let dec: Vec<&SpilloverDecomposition> = ok.iter().map(|(d, _)| *d).collect();
    let ind: Vec<&DirectionalIndices> = ok.iter().map(|(_, i)| *i).collect();
    macro_rules! avg_vec {
        ($f:ident) => {
            mean_vec(&ind.iter().map(|i| &i.$f).collect::<Vec<_>>())
        };
    }
    let decomposition = SpilloverDecomposition {
        contemporaneous: mean_mat(&dec.iter().map(|d| &d.contemporaneous).collect::<Vec<_>>()),
        lagged: mean_mat(&dec.iter().map(|d| &d.lagged).collect::<Vec<_>>()),
        r_squared: mean_vec(&dec.iter().map(|d| &d.r_squared).collect::<Vec<_>>()),
        label: dec.last().and_then(|d| d.label),
        ridge_applied: dec.iter().any(|d| d.ridge_applied),
    };
    let indices = DirectionalIndices {
        tci: ind.iter().map(|i| i.tci).sum::<f64>() / n,
        tci_c: ind.iter().map(|i| i.tci_c).sum::<f64>() / n,
        tci_l: ind.iter().map(|i| i.tci_l).sum::<f64>() / n,
        to: avg_vec!(to),
        to_c: avg_vec!(to_c),
        to_l: avg_vec!(to_l),
        from: avg_vec!(from),
        from_c: avg_vec!(from_c),
        from_l: avg_vec!(from_l),
        net: avg_vec!(net),
        net_c: avg_vec!(net_c),
        net_l: avg_vec!(net_l),
        npdc: mean_mat(&ind.iter().map(|i| &i.npdc).collect::<Vec<_>>()),
    };
    Ok(AveragedSpillover {
        decomposition,
        indices,
        n_windows: ok.len(),
    })
}
