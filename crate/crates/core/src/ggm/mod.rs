//! Gaussian graphical model estimation: graphical lasso over a penalty path
//! with EBIC model selection, and conversion of precision matrices to
//! partial-correlation networks.

mod glasso;
mod network;
mod path;

use serde::{Deserialize, Serialize};

use crate::stats::CorrelationMethod;
use crate::{Error, Result};

pub use glasso::{glasso, glasso_objective, GlassoFit};
pub use network::{precision_to_pcor, Network, Provenance};
pub(crate) use path::fit_weights;
pub use path::{
    ebic, edge_count, estimate_from_correlation, estimate_network, gaussian_loglik, lambda_path,
    Estimate, GlassoPath,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Graphical lasso with EBIC selection over the penalty path.
    #[default]
    EbicGlasso,
    /// Unregularized partial correlations from the inverse correlation matrix.
    Pcor,
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ebicglasso" | "glasso" => Ok(Estimator::EbicGlasso),
            "pcor" => Ok(Estimator::Pcor),
            other => Err(Error::InvalidArgument(format!("unknown estimator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationOptions {
    pub estimator: Estimator,
    /// EBIC hyperparameter.
    pub gamma: f64,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub penalize_diagonal: bool,
    /// Stop when the mean absolute change of the working covariance falls below this.
    pub convergence_tol: f64,
    /// Cap on full coordinate-descent sweeps per penalty value.
    pub max_iter: usize,
    pub correlation_method: CorrelationMethod,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        EstimationOptions {
            estimator: Estimator::EbicGlasso,
            gamma: 0.5,
            n_lambda: 100,
            lambda_min_ratio: 0.01,
            penalize_diagonal: false,
            convergence_tol: 1e-4,
            max_iter: 10_000,
            correlation_method: CorrelationMethod::Auto,
        }
    }
}

impl EstimationOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.n_lambda == 0 {
            return Err(Error::InvalidArgument("n_lambda must be at least 1".into()));
        }
        if !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda_min_ratio must be in (0, 1], got {}",
                self.lambda_min_ratio
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidArgument("convergence_tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}
