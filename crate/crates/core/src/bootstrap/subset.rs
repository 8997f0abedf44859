//! Case- and node-dropping subset bootstraps and the CS-coefficient.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{fit_replicate, Replicate, MAX_FAILURE_RATE};
use crate::centrality::CentralityIndex;
use crate::ggm::{estimate_network, EstimationOptions};
use crate::ingest::Dataset;
use crate::par::map_indexed;
use crate::seed::{path_rng, purpose};
use crate::stats::pearson;
use crate::{Error, Result};

/// Minimum nodes kept by node dropping.
pub const MIN_NODES: usize = 3;
/// Floor on retained cases, on top of `p + 1`.
pub const MIN_CASES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetKind {
    Case,
    Node,
}

impl std::str::FromStr for SubsetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case" => Ok(SubsetKind::Case),
            "node" => Ok(SubsetKind::Node),
            other => Err(Error::InvalidArgument(format!("unknown subset type {other:?}"))),
        }
    }
}

/// What is correlated between a subset replicate and the full-data estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityIndex {
    Strength,
    Closeness,
    Betweenness,
    Edge,
}

impl StabilityIndex {
    pub const ALL: [StabilityIndex; 4] = [
        StabilityIndex::Strength,
        StabilityIndex::Closeness,
        StabilityIndex::Betweenness,
        StabilityIndex::Edge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StabilityIndex::Strength => "strength",
            StabilityIndex::Closeness => "closeness",
            StabilityIndex::Betweenness => "betweenness",
            StabilityIndex::Edge => "edge",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for StabilityIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StabilityIndex::ALL
            .into_iter()
            .find(|i| i.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stability index {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubsetOutcome {
    /// Correlation per [`StabilityIndex::ALL`] slot; `None` when undefined
    /// (a constant vector on either side).
    Ok([Option<f64>; 4]),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetBootstrapResult {
    pub kind: SubsetKind,
    pub drop_levels: Vec<f64>,
    pub boots_per_level: usize,
    pub base_seed: u64,
    pub options: EstimationOptions,
    pub n_cases: usize,
    pub p: usize,
    /// Cases (case dropping) or nodes (node dropping) kept at each level.
    pub retained: Vec<usize>,
    /// `outcomes[level][replicate]`.
    pub outcomes: Vec<Vec<SubsetOutcome>>,
}

impl SubsetBootstrapResult {
    /// Correlations at one level over successful replicates.
    pub fn correlations(&self, level: usize, index: StabilityIndex) -> Vec<Option<f64>> {
        self.outcomes[level]
            .iter()
            .filter_map(|o| match o {
                SubsetOutcome::Ok(c) => Some(c[index.slot()]),
                SubsetOutcome::Failed(_) => None,
            })
            .collect()
    }

    pub fn n_failed(&self) -> usize {
        self.outcomes
            .iter()
            .flatten()
            .filter(|o| matches!(o, SubsetOutcome::Failed(_)))
            .count()
    }
}

/// 10 levels equally spaced on [0.1, 0.75].
pub fn default_drop_levels() -> Vec<f64> {
    (0..10).map(|k| 0.1 + 0.65 * k as f64 / 9.0).collect()
}

/// `ceil((1 - level) * total)`, guarded against round-off just above an integer.
fn retained_count(level: f64, total: usize) -> usize {
    ((1.0 - level) * total as f64 - 1e-9).ceil().max(0.0) as usize
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no drop levels given".into()));
    }
    if let Some(l) = levels.iter().find(|l| !(**l >= 0.0 && **l < 1.0)) {
        return Err(Error::InvalidArgument(format!("drop level {l} is outside [0, 1)")));
    }
    Ok(())
}

fn cor_or_none(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(a, b).ok().filter(|r| r.is_finite())
}

fn upper(w: &nalgebra::DMatrix<f64>, nodes: &[usize]) -> Vec<f64> {
    let mut out = Vec::new();
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            out.push(w[(i, j)]);
        }
    }
    out
}

fn compare(reference: &Replicate, kept_nodes: &[usize], rep: &Replicate) -> [Option<f64>; 4] {
    let local: Vec<usize> = (0..kept_nodes.len()).collect();
    let mut out = [None; 4];
    for (slot, idx) in CentralityIndex::ALL.into_iter().enumerate() {
        let r: Vec<f64> = kept_nodes.iter().map(|&i| reference.centrality(idx)[i]).collect();
        out[slot] = cor_or_none(&r, rep.centrality(idx));
    }
    out[StabilityIndex::Edge.slot()] = cor_or_none(&upper(&reference.weights, kept_nodes), &upper(&rep.weights, &local));
    out
}

fn run_subsets(
    kind: SubsetKind,
    dataset: &Dataset,
    options: &EstimationOptions,
    drop_levels: &[f64],
    n_boots: usize,
    base_seed: u64,
    workers: usize,
) -> Result<SubsetBootstrapResult> {
    check_levels(drop_levels)?;
    if n_boots == 0 {
        return Err(Error::InvalidArgument("n_boots must be positive".into()));
    }
    let (n, p) = (dataset.n(), dataset.p());
    let total = match kind {
        SubsetKind::Case => n,
        SubsetKind::Node => p,
    };
    let required = match kind {
        SubsetKind::Case => (p + 1).max(MIN_CASES),
        SubsetKind::Node => MIN_NODES,
    };
    let retained: Vec<usize> = drop_levels.iter().map(|&l| retained_count(l, total)).collect();
    for (&level, &kept) in drop_levels.iter().zip(&retained) {
        if kept < required {
            return Err(Error::TooFewRetained { level, retained: kept, required });
        }
    }

    let reference = Replicate::from_weights(estimate_network(dataset, options)?.network.weights().clone());
    let per_level = n_boots.div_ceil(drop_levels.len());
    let all_nodes: Vec<usize> = (0..p).collect();

    let flat = map_indexed(drop_levels.len() * per_level, workers, |job| {
        let (level, b) = (job / per_level, job % per_level);
        let mut rng = path_rng(base_seed, &[purpose::BOOTSTRAP, level as u64, b as u64]);
        let mut keep = sample(&mut rng, total, retained[level]).into_vec();
        // Sorted, so a zero drop level reproduces the full data exactly.
        keep.sort_unstable();
        let fitted = match kind {
            SubsetKind::Case => fit_replicate(&dataset.select_rows(&keep), options).map(|r| compare(&reference, &all_nodes, &r)),
            SubsetKind::Node => fit_replicate(&dataset.select_columns(&keep), options).map(|r| compare(&reference, &keep, &r)),
        };
        match fitted {
            Ok(c) => SubsetOutcome::Ok(c),
            Err(e) => SubsetOutcome::Failed(e.to_string()),
        }
    });

    let failed = flat.iter().filter(|o| matches!(o, SubsetOutcome::Failed(_))).count();
    if failed as f64 > MAX_FAILURE_RATE * flat.len() as f64 {
        return Err(Error::TooManyFailures { failed, total: flat.len() });
    }
    let mut it = flat.into_iter();
    let outcomes = (0..drop_levels.len()).map(|_| it.by_ref().take(per_level).collect()).collect();
    Ok(SubsetBootstrapResult {
        kind,
        drop_levels: drop_levels.to_vec(),
        boots_per_level: per_level,
        base_seed,
        options: options.clone(),
        n_cases: n,
        p,
        retained,
        outcomes,
    })
}

/// Re-estimate on `ceil((1 - level) n)` cases drawn without replacement and
/// correlate the replicate's centralities with the full-data ones. `n_boots`
/// is the total, split evenly (rounded up) over the levels.
pub fn case_dropping_boot(
    dataset: &Dataset,
    options: &EstimationOptions,
    drop_levels: &[f64],
    n_boots: usize,
    base_seed: u64,
    workers: usize,
) -> Result<SubsetBootstrapResult> {
    run_subsets(SubsetKind::Case, dataset, options, drop_levels, n_boots, base_seed, workers)
}

/// As [`case_dropping_boot`] but drops variables; correlations run over the
/// retained nodes.
pub fn node_dropping_boot(
    dataset: &Dataset,
    options: &EstimationOptions,
    drop_levels: &[f64],
    n_boots: usize,
    base_seed: u64,
    workers: usize,
) -> Result<SubsetBootstrapResult> {
    run_subsets(SubsetKind::Node, dataset, options, drop_levels, n_boots, base_seed, workers)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsCoefficient {
    pub index: StabilityIndex,
    pub cor_threshold: f64,
    pub probability: f64,
    /// Largest drop level such that it and every smaller tested level pass; 0 if none.
    pub value: f64,
    /// Share of replicates at or above the threshold, per level in input order.
    /// Undefined correlations count as below.
    pub proportions: Vec<f64>,
}

pub fn cs_coefficient(
    result: &SubsetBootstrapResult,
    index: StabilityIndex,
    cor_threshold: f64,
    probability: f64,
) -> CsCoefficient {
    let proportions: Vec<f64> = (0..result.drop_levels.len())
        .map(|l| {
            let c = result.correlations(l, index);
            if c.is_empty() {
                return 0.0;
            }
            c.iter().filter(|v| v.is_some_and(|r| r >= cor_threshold)).count() as f64 / c.len() as f64
        })
        .collect();
    let mut order: Vec<usize> = (0..proportions.len()).collect();
    order.sort_by(|&a, &b| result.drop_levels[a].total_cmp(&result.drop_levels[b]));
    let mut value = 0.0;
    for l in order {
        if proportions[l] >= probability - 1e-12 {
            value = result.drop_levels[l];
        } else {
            break;
        }
    }
    CsCoefficient {
        index,
        cor_threshold,
        probability,
        value,
        proportions,
    }
}

/// One coefficient per [`StabilityIndex`].
pub fn cs_coefficients(result: &SubsetBootstrapResult, cor_threshold: f64, probability: f64) -> Vec<CsCoefficient> {
    StabilityIndex::ALL
        .into_iter()
        .map(|i| cs_coefficient(result, i, cor_threshold, probability))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(levels: Vec<f64>, cors: Vec<Vec<f64>>) -> SubsetBootstrapResult {
        SubsetBootstrapResult {
            kind: SubsetKind::Case,
            boots_per_level: cors[0].len(),
            retained: vec![100; levels.len()],
            drop_levels: levels,
            base_seed: 0,
            options: EstimationOptions::default(),
            n_cases: 100,
            p: 5,
            outcomes: cors
                .into_iter()
                .map(|l| l.into_iter().map(|c| SubsetOutcome::Ok([Some(c); 4])).collect())
                .collect(),
        }
    }

    #[test]
    fn default_levels() {
        let l = default_drop_levels();
        assert_eq!(l.len(), 10);
        assert!((l[0] - 0.1).abs() < 1e-15 && (l[9] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn retained_counts() {
        assert_eq!(retained_count(0.1, 100), 90);
        assert_eq!(retained_count(0.5, 10), 5);
        assert_eq!(retained_count(0.75, 2500), 625);
        assert_eq!(retained_count(0.0, 7), 7);
    }

    #[test]
    fn cs_boundaries() {
        let r = fake(vec![0.1, 0.3, 0.5], vec![vec![1.0; 20]; 3]);
        assert_eq!(cs_coefficient(&r, StabilityIndex::Strength, 0.7, 0.95).value, 0.5);
        let r = fake(vec![0.1, 0.3, 0.5], vec![vec![0.2; 20]; 3]);
        assert_eq!(cs_coefficient(&r, StabilityIndex::Strength, 0.7, 0.95).value, 0.0);
    }

    #[test]
    fn cs_requires_every_smaller_level() {
        let mut bad = vec![0.9; 20];
        bad[..5].iter_mut().for_each(|v| *v = 0.1);
        let r = fake(vec![0.1, 0.3, 0.5], vec![vec![0.9; 20], bad, vec![0.9; 20]]);
        assert_eq!(cs_coefficient(&r, StabilityIndex::Edge, 0.7, 0.95).value, 0.1);
    }

    #[test]
    fn undefined_counts_as_failing() {
        let mut r = fake(vec![0.1, 0.2], vec![vec![1.0; 4]; 2]);
        r.outcomes[0][0] = SubsetOutcome::Ok([None; 4]);
        let cs = cs_coefficient(&r, StabilityIndex::Betweenness, 0.7, 0.95);
        assert_eq!(cs.proportions[0], 0.75);
        assert_eq!(cs.value, 0.0);
    }

    #[test]
    fn bad_levels_rejected() {
        assert!(check_levels(&[]).is_err());
        assert!(check_levels(&[1.0]).is_err());
        assert!(check_levels(&[-0.1]).is_err());
        assert!(check_levels(&[0.0, 0.5]).is_ok());
    }
}
