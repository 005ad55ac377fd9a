//! Connectedness from R² decompositions of per-asset regressions on
//! contemporaneous and lagged returns.

mod decompose;
mod design;
mod indices;
mod network;
mod pci;
mod relweights;
mod rolling;

pub use decompose::{decompose_window, SpilloverDecomposition};
pub use design::{build_design, min_window, regressor_count, DesignMatrices, RegressionDesign, Regressor};
pub use indices::{directional_indices, DirectionalIndices};
pub use network::{export_network, Edge, Network, Node, Role, DEFAULT_THRESHOLD};
pub use pci::{pci_matrix, PciVariant, PCI_FLOOR, PCI_NORMALIZER};
pub use relweights::{relative_weights, relative_weights_from_corr, RelativeWeights, MAX_CONDITION, PSD_FLOOR, RIDGE};
pub use rolling::{
    averaged_spillover, rolling_connectedness, window_ends, AveragedSpillover, RollingConfig, WindowOutcome,
    WindowRecord,
};
