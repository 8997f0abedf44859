//! Bootstrap engines and the inference built on them.
//!
//! Replicate `b` draws all of its randomness from the seed path
//! `(base_seed, BOOTSTRAP, b)`, so a run is a pure function of its inputs and
//! does not depend on the number of worker threads.

mod inference;
mod subset;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::centrality::{centrality_table, CentralityIndex, CentralityTable, Centralities};
use crate::ggm::{estimate_network, fit_weights, EstimationOptions, Estimator, Network};
use crate::ingest::Dataset;
use crate::par::map_indexed;
use crate::seed::{path_rng, purpose};
use crate::simgen::{pcor_to_covariance, sample_mvn_with};
use crate::stats::correlation_matrix;
use crate::{Error, Result};

pub use inference::{
    alpha_floor, check_alpha, difference_matrix, difference_test, edge_ci, edge_plot_order,
    percentile_interval, DifferenceMatrix, DifferenceTestResult, EdgeCi, Element, Statistic,
};
pub use subset::{
    case_dropping_boot, cs_coefficient, cs_coefficients, default_drop_levels, node_dropping_boot,
    CsCoefficient, StabilityIndex, SubsetBootstrapResult, SubsetKind, SubsetOutcome,
};

/// A run aborts when more than this share of replicates fail.
pub const MAX_FAILURE_RATE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapKind {
    Nonparametric,
    Parametric,
}

impl std::str::FromStr for BootstrapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nonparametric" => Ok(BootstrapKind::Nonparametric),
            "parametric" => Ok(BootstrapKind::Parametric),
            other => Err(Error::InvalidArgument(format!("unknown bootstrap type {other:?}"))),
        }
    }
}

/// One re-estimated network and its raw centralities.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub weights: DMatrix<f64>,
    pub strength: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
}

impl Replicate {
    pub fn from_weights(weights: DMatrix<f64>) -> Self {
        let c = Centralities::of(&weights);
        Replicate {
            weights,
            strength: c.strength,
            closeness: c.closeness,
            betweenness: c.betweenness,
        }
    }

    pub fn centrality(&self, index: CentralityIndex) -> &[f64] {
        match index {
            CentralityIndex::Strength => &self.strength,
            CentralityIndex::Closeness => &self.closeness,
            CentralityIndex::Betweenness => &self.betweenness,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplicateOutcome {
    Ok(Replicate),
    Failed(String),
}

impl ReplicateOutcome {
    pub fn replicate(&self) -> Option<&Replicate> {
        match self {
            ReplicateOutcome::Ok(r) => Some(r),
            ReplicateOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub kind: BootstrapKind,
    /// Requested replicate count; `replicates.len() == n_boots`.
    pub n_boots: usize,
    pub base_seed: u64,
    pub options: EstimationOptions,
    /// Cases per replicate.
    pub n_cases: usize,
    pub reference: Network,
    pub reference_centrality: CentralityTable,
    pub replicates: Vec<ReplicateOutcome>,
    /// Set for parametric runs on a regularized estimator: the replicates are
    /// drawn from an already shrunken model, so intervals are biased toward zero.
    pub shrinkage_warning: bool,
}

impl BootstrapResult {
    pub fn labels(&self) -> &[String] {
        self.reference.labels()
    }

    pub fn p(&self) -> usize {
        self.reference.p()
    }

    pub fn successes(&self) -> impl Iterator<Item = &Replicate> + '_ {
        self.replicates.iter().filter_map(ReplicateOutcome::replicate)
    }

    pub fn n_successful(&self) -> usize {
        self.successes().count()
    }

    /// `(replicate index, reason)` for every failed replicate.
    pub fn failures(&self) -> Vec<(usize, &str)> {
        self.replicates
            .iter()
            .enumerate()
            .filter_map(|(b, r)| match r {
                ReplicateOutcome::Failed(msg) => Some((b, msg.as_str())),
                ReplicateOutcome::Ok(_) => None,
            })
            .collect()
    }

    /// Reference values of the reference network, shaped like a replicate.
    pub fn reference_replicate(&self) -> Replicate {
        Replicate {
            weights: self.reference.weights().clone(),
            strength: self.reference_centrality.strength.clone(),
            closeness: self.reference_centrality.closeness.clone(),
            betweenness: self.reference_centrality.betweenness.clone(),
        }
    }
}

/// Estimate weights and centralities for one (resampled) dataset.
pub(crate) fn fit_replicate(dataset: &Dataset, options: &EstimationOptions) -> Result<Replicate> {
    let cor = correlation_matrix(dataset, options.correlation_method)?;
    let w = fit_weights(cor.entries(), cor.n_cases(), options)?;
    Ok(Replicate::from_weights(w))
}

fn check_boots(n_boots: usize) -> Result<()> {
    if n_boots < 2 {
        return Err(Error::InvalidArgument(format!("n_boots must be at least 2, got {n_boots}")));
    }
    Ok(())
}

fn check_failures(outcomes: &[ReplicateOutcome]) -> Result<()> {
    let failed = outcomes.iter().filter(|o| o.replicate().is_none()).count();
    if failed as f64 > MAX_FAILURE_RATE * outcomes.len() as f64 {
        return Err(Error::TooManyFailures {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

/// Resample the `n` cases with replacement `n_boots` times and re-run the
/// full estimation pipeline on each resample.
pub fn nonparametric_boot(
    dataset: &Dataset,
    options: &EstimationOptions,
    n_boots: usize,
    base_seed: u64,
    workers: usize,
) -> Result<BootstrapResult> {
    check_boots(n_boots)?;
    let reference = estimate_network(dataset, options)?.network;
    let n = dataset.n();
    let replicates = map_indexed(n_boots, workers, |b| {
        let mut rng = path_rng(base_seed, &[purpose::BOOTSTRAP, b as u64]);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        match fit_replicate(&dataset.select_rows(&rows), options) {
            Ok(r) => ReplicateOutcome::Ok(r),
            Err(e) => ReplicateOutcome::Failed(e.to_string()),
        }
    });
    check_failures(&replicates)?;
    Ok(BootstrapResult {
        kind: BootstrapKind::Nonparametric,
        n_boots,
        base_seed,
        options: options.clone(),
        n_cases: n,
        reference_centrality: centrality_table(&reference),
        reference,
        replicates,
        shrinkage_warning: false,
    })
}

/// Sample `n` multivariate-normal cases from the network-implied model for
/// each replicate and re-estimate.
pub fn parametric_boot(
    network: &Network,
    n: usize,
    options: &EstimationOptions,
    n_boots: usize,
    base_seed: u64,
    workers: usize,
) -> Result<BootstrapResult> {
    check_boots(n_boots)?;
    options.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cases, got {n}")));
    }
    let cov = pcor_to_covariance(network)?;
    let chol = cov
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: crate::stats::min_eigenvalue(&cov) })?;
    let labels = network.labels().to_vec();
    let p = network.p();
    let replicates = map_indexed(n_boots, workers, |b| {
        let mut rng = path_rng(base_seed, &[purpose::BOOTSTRAP, b as u64]);
        let values = sample_mvn_with(chol.l_dirty(), n, &mut rng);
        let ds = Dataset::from_parts_unchecked(
            values,
            labels.clone(),
            vec![crate::ingest::VariableType::Continuous; p],
            Default::default(),
        );
        match fit_replicate(&ds, options) {
            Ok(r) => ReplicateOutcome::Ok(r),
            Err(e) => ReplicateOutcome::Failed(e.to_string()),
        }
    });
    check_failures(&replicates)?;
    Ok(BootstrapResult {
        kind: BootstrapKind::Parametric,
        n_boots,
        base_seed,
        options: options.clone(),
        n_cases: n,
        reference_centrality: centrality_table(network),
        reference: network.clone(),
        replicates,
        shrinkage_warning: options.estimator == Estimator::EbicGlasso,
    })
}
