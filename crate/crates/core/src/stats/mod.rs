//! Correlation estimation and the numerical pieces it needs.

pub mod bvn;
mod correlation;
pub(crate) mod optimize;
pub mod polychoric;
mod psd;
mod quantile;

pub use bvn::{bvn_cdf, bvn_rect_prob, phi, phi_inv};
pub use correlation::{
    correlation_matrix, midranks, pearson, spearman, CorrelationMatrix, CorrelationMethod,
};
pub use polychoric::{
    polychoric, polychoric_rho, polychoric_thresholds, ContingencyTable, PolychoricEstimate,
};
pub use psd::{min_eigenvalue, nearest_psd, EIGEN_FLOOR, PSD_TOLERANCE};
pub use quantile::{quantile_type6, quantile_type6_sorted};
