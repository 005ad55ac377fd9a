use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::decompose::SpilloverDecomposition;

/// Largest possible bilateral attribution mass, in percentage points.
pub const PCI_NORMALIZER: f64 = 200.0;
/// Off-diagonal floor that keeps the matrix invertible.
pub const PCI_FLOOR: f64 = 1e-6;

/// Which attribution matrices feed the pairwise connectedness index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PciVariant {
    Total,
    Contemporaneous,
    Lagged,
}

/// `PCI[i][j] = (M[i][j] + M[j][i]) / 200` clipped into `[1e-6, 1]` with unit
/// diagonal, where `M` is `C + L`, `C` or `L`.
pub fn pci_matrix(spill: &SpilloverDecomposition, variant: PciVariant) -> DMatrix<f64> {
    let m = match variant {
        PciVariant::Total => spill.total(),
        PciVariant::Contemporaneous => spill.contemporaneous.clone(),
        PciVariant::Lagged => spill.lagged.clone(),
    };
    let k = m.nrows();
    DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0
        } else {
            ((m[(i, j)] + m[(j, i)]) / PCI_NORMALIZER).clamp(PCI_FLOOR, 1.0)
        }
    })
}
