use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EstimationOptions, Estimator};
use crate::stats::CorrelationMethod;
use crate::{Error, Result};

/// Where a network's weights came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum Provenance {
    Estimated {
        estimator: Estimator,
        options: EstimationOptions,
        /// Selected penalty; `None` for the unregularized estimator.
        lambda: Option<f64>,
        n: usize,
        correlation_method: CorrelationMethod,
        psd_repaired: bool,
    },
    Generated {
        description: String,
    },
    Supplied,
}

/// Undirected weighted network of partial correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: DMatrix<f64>,
    labels: Vec<String>,
    provenance: Provenance,
}

impl Network {
    /// Validates symmetry, a zero diagonal and |w| < 1.
    pub fn new(weights: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let p = weights.nrows();
        if weights.ncols() != p {
            return Err(Error::InvalidArgument("weight matrix must be square".into()));
        }
        if labels.len() != p {
            return Err(Error::InvalidArgument(format!("{} labels for {p} nodes", labels.len())));
        }
        for i in 0..p {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..i {
                let w = weights[(i, j)];
                if w != weights[(j, i)] {
                    return Err(Error::InvalidArgument(format!("asymmetric weight at ({i}, {j})")));
                }
                if !(w.abs() < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "weight {w} at ({i}, {j}) is not a partial correlation"
                    )));
                }
            }
        }
        Ok(Network {
            weights,
            labels,
            provenance: Provenance::Supplied,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn p(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// p(p - 1) / 2.
    pub fn candidate_edges(&self) -> usize {
        self.p() * (self.p().saturating_sub(1)) / 2
    }

    /// Nonzero edges as `(i, j, weight)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let p = self.p();
        let mut out = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }
}

/// Partial correlations from a precision matrix: `-K_ij / sqrt(K_ii K_jj)`,
/// zero diagonal.
pub fn precision_to_pcor(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = k.nrows();
    if k.ncols() != p {
        return Err(Error::InvalidArgument("precision matrix must be square".into()));
    }
    let d: Vec<f64> = (0..p).map(|i| k[(i, i)]).collect();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "nonpositive precision diagonal at {i}: {}",
            d[i]
        )));
    }
    let s: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let mut w = DMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..j {
            let v = -0.5 * (k[(i, j)] + k[(j, i)]) / (s[i] * s[j]);
            // -0.0 would print as "-0" in exports.
            let v = if v == 0.0 { 0.0 } else { v };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    Ok(w)
}
