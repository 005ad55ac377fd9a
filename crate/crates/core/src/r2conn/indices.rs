use nalgebra::DMatrix;

use super::decompose::SpilloverDecomposition;
use crate::linalg::ordered_sum;

/// System-wide, directional and pairwise connectedness derived from one
/// decomposition. All values in percentage points.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalIndices {
    pub tci: f64,
    pub tci_c: f64,
    pub tci_l: f64,
    pub to: Vec<f64>,
    pub to_c: Vec<f64>,
    pub to_l: Vec<f64>,
    pub from: Vec<f64>,
    pub from_c: Vec<f64>,
    pub from_l: Vec<f64>,
    pub net: Vec<f64>,
    pub net_c: Vec<f64>,
    pub net_l: Vec<f64>,
    /// `npdc[(i, j)] > 0` when `i` transmits more to `j` than it receives.
    /// Rows sum to `net`.
    pub npdc: DMatrix<f64>,
}

/// TO/FROM always exclude own effects. The own-lag diagonal of `L` enters the
/// TCI only when `include_own_lag` is set.
pub fn directional_indices(spill: &SpilloverDecomposition, include_own_lag: bool) -> DirectionalIndices {
    let c = &spill.contemporaneous;
    let l = &spill.lagged;
    let k = spill.n_assets();
    let kf = k as f64;

    let off_sum = |m: &DMatrix<f64>| -> f64 {
        ordered_sum((0..k).flat_map(|a| (0..k).map(move |b| (a, b))).filter(|(a, b)| a != b).map(|(a, b)| m[(a, b)]))
    };
    let tci_c = off_sum(c) / kf;
    let own = if include_own_lag { ordered_sum((0..k).map(|i| l[(i, i)])) } else { 0.0 };
    let tci_l = (off_sum(l) + own) / kf;

    let col_off = |m: &DMatrix<f64>, i: usize| ordered_sum((0..k).filter(|&r| r != i).map(|r| m[(r, i)]));
    let row_off = |m: &DMatrix<f64>, i: usize| ordered_sum((0..k).filter(|&r| r != i).map(|r| m[(i, r)]));

    let to_c: Vec<f64> = (0..k).map(|i| col_off(c, i)).collect();
    let to_l: Vec<f64> = (0..k).map(|i| col_off(l, i)).collect();
    let from_c: Vec<f64> = (0..k).map(|i| row_off(c, i)).collect();
    let from_l: Vec<f64> = (0..k).map(|i| row_off(l, i)).collect();
    let to: Vec<f64> = to_c.iter().zip(&to_l).map(|(a, b)| a + b).collect();
    let from: Vec<f64> = from_c.iter().zip(&from_l).map(|(a, b)| a + b).collect();
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };

    let mut npdc = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let i_to_j = c[(j, i)] + l[(j, i)];
            let j_to_i = c[(i, j)] + l[(i, j)];
            npdc[(i, j)] = i_to_j - j_to_i;
            npdc[(j, i)] = j_to_i - i_to_j;
        }
    }

    DirectionalIndices {
        tci: tci_c + tci_l,
        tci_c,
        tci_l,
        net: diff(&to, &from),
        net_c: diff(&to_c, &from_c),
        net_l: diff(&to_l, &from_l),
        to,
        to_c,
        to_l,
        from,
        from_c,
        from_l,
        npdc,
    }
}
