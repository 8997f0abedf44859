//! Replicated simulation studies: CS-coefficients under case dropping, and the
//! rejection rates of bootstrapped edge and centrality difference tests.
//!
//! Every (condition, replication) pair is one job with its own seed path, so
//! results depend only on the base seed and the order conditions are listed in.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{chain_network, ordinalize, pcor_to_covariance, rewire, sample_mvn};
use crate::bootstrap::{
    case_dropping_boot, check_alpha, cs_coefficients, default_drop_levels, difference_test,
    nonparametric_boot, Element, Statistic,
};
use crate::ggm::EstimationOptions;
use crate::ingest::Dataset;
use crate::par::map_indexed;
use crate::seed::{derive_seed, path_rng, purpose};
use crate::stats::quantile_type6_sorted;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    /// CS-coefficients from case-dropping bootstraps.
    Cs,
    /// Difference tests among the true edges of an all-equal ring.
    EdgeDiff,
    /// Difference tests among node centralities.
    CentralityDiff,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Cs => "cs",
            Study::EdgeDiff => "edge-diff",
            Study::CentralityDiff => "centrality-diff",
        }
    }
}

impl std::str::FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Ok(Study::Cs),
            "edge-diff" => Ok(Study::EdgeDiff),
            "centrality-diff" => Ok(Study::CentralityDiff),
            other => Err(Error::InvalidArgument(format!("unknown study {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub p: usize,
    pub edge_weight: f64,
    pub negative_proportion: f64,
    pub rewiring: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    /// Bootstrap replicates per dataset; for the CS study, the total over all drop levels.
    pub n_boots: usize,
    /// Ordinal categories per variable; `0` keeps the data continuous.
    pub ordinal_levels: usize,
    pub drop_levels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub cor_threshold: f64,
    pub probability: f64,
    pub base_seed: u64,
    pub estimation: EstimationOptions,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            p: 10,
            edge_weight: 0.25,
            negative_proportion: 0.5,
            rewiring: vec![0.0, 0.1, 0.5, 1.0],
            sample_sizes: vec![100, 500, 2500],
            replications: 100,
            n_boots: 1000,
            ordinal_levels: 4,
            drop_levels: default_drop_levels(),
            alphas: vec![0.05],
            cor_threshold: 0.7,
            probability: 0.95,
            base_seed: 1,
            estimation: EstimationOptions::default(),
        }
    }
}

impl SimulationConfig {
    /// Desk-scale defaults for a study. The edge study uses an all-positive
    /// ring with weight 0.3 and no rewiring, tested at three levels of alpha.
    pub fn for_study(study: Study) -> Self {
        let base = SimulationConfig::default();
        match study {
            Study::Cs | Study::CentralityDiff => base,
            Study::EdgeDiff => SimulationConfig {
                edge_weight: 0.3,
                negative_proportion: 0.0,
                rewiring: vec![0.0],
                alphas: vec![0.05, 0.01, 0.002],
                ..base
            },
        }
    }

    pub fn validate(&self, study: Study) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.rewiring.is_empty() || self.sample_sizes.is_empty() {
            return bad("need at least one rewiring probability and one sample size".into());
        }
        if let Some(r) = self.rewiring.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return bad(format!("rewiring probability {r} is outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.negative_proportion) || !(0.0..=1.0).contains(&self.probability) {
            return bad("proportions must be in [0, 1]".into());
        }
        if self.ordinal_levels == 1 {
            return bad("ordinal_levels must be 0 (continuous) or at least 2".into());
        }
        if study != Study::Cs {
            if self.alphas.is_empty() {
                return bad("need at least one alpha".into());
            }
            for &a in &self.alphas {
                check_alpha(a, self.n_boots)?;
            }
        }
        self.estimation.validate()
    }

    /// Conditions in enumeration order: rewiring outer, sample size inner.
    pub fn conditions(&self) -> Vec<(f64, usize)> {
        self.rewiring
            .iter()
            .flat_map(|&r| self.sample_sizes.iter().map(move |&n| (r, n)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub rewiring: f64,
    pub n: usize,
    pub replication: usize,
    pub metric: String,
    pub alpha: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationFailure {
    pub rewiring: f64,
    pub n: usize,
    pub replication: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub rewiring: f64,
    pub n: usize,
    pub metric: String,
    pub alpha: Option<f64>,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation across replications.
    pub sd: f64,
    /// Monte-Carlo standard error of the mean, `sd / sqrt(count)`.
    pub se: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub study: Study,
    pub config: SimulationConfig,
    pub records: Vec<SimulationRecord>,
    pub failures: Vec<SimulationFailure>,
    pub summaries: Vec<MetricSummary>,
    pub n_jobs: usize,
}

impl SimulationResult {
    pub fn failure_rate(&self) -> f64 {
        self.failures.len() as f64 / self.n_jobs as f64
    }

    /// Per-replication values of one metric in one condition.
    pub fn values(&self, rewiring: f64, n: usize, metric: &str, alpha: Option<f64>) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.rewiring == rewiring && r.n == n && r.metric == metric && r.alpha == alpha)
            .map(|r| r.value)
            .collect()
    }

    pub fn summary(&self, rewiring: f64, n: usize, metric: &str, alpha: Option<f64>) -> Option<&MetricSummary> {
        self.summaries
            .iter()
            .find(|s| s.rewiring == rewiring && s.n == n && s.metric == metric && s.alpha == alpha)
    }
}

type Metric = (String, Option<f64>, f64);

fn simulate_dataset(cfg: &SimulationConfig, rewiring: f64, n: usize, job_seed: u64) -> Result<(crate::ggm::Network, Dataset)> {
    let net = chain_network(cfg.p, cfg.edge_weight, cfg.negative_proportion, derive_seed(job_seed, &[purpose::NETWORK]))?;
    let net = rewire(&net, rewiring, derive_seed(job_seed, &[purpose::REWIRE]))?;
    let cov = pcor_to_covariance(&net)?;
    let x = sample_mvn(&cov, n, derive_seed(job_seed, &[purpose::SAMPLE]))?;
    let ds = if cfg.ordinal_levels >= 2 {
        ordinalize(&x, cfg.ordinal_levels, derive_seed(job_seed, &[purpose::ORDINALIZE]))?
    } else {
        Dataset::from_matrix(x)?
    };
    Ok((net, ds))
}

fn pair_rates(
    boot: &crate::bootstrap::BootstrapResult,
    elements: &[Element],
    statistic: Statistic,
    alpha: f64,
) -> Result<(f64, Vec<bool>)> {
    let mut flags = Vec::new();
    for a in 0..elements.len() {
        for b in (a + 1)..elements.len() {
            flags.push(difference_test(boot, elements[a], elements[b], statistic, alpha)?.significant);
        }
    }
    let rate = flags.iter().filter(|&&f| f).count() as f64 / flags.len().max(1) as f64;
    Ok((rate, flags))
}

fn run_job(study: Study, cfg: &SimulationConfig, rewiring: f64, n: usize, job_seed: u64) -> Result<Vec<Metric>> {
    let (net, ds) = simulate_dataset(cfg, rewiring, n, job_seed)?;
    let boot_seed = derive_seed(job_seed, &[purpose::BOOTSTRAP]);
    let opts = &cfg.estimation;
    let mut out = Vec::new();
    match study {
        Study::Cs => {
            let sub = case_dropping_boot(&ds, opts, &cfg.drop_levels, cfg.n_boots, boot_seed, 1)?;
            for cs in cs_coefficients(&sub, cfg.cor_threshold, cfg.probability) {
                out.push((format!("cs_{}", cs.index.name()), None, cs.value));
            }
            out.push(("failed_replicates".into(), None, sub.n_failed() as f64));
        }
        Study::EdgeDiff => {
            let boot = nonparametric_boot(&ds, opts, cfg.n_boots, boot_seed, 1)?;
            let elements: Vec<Element> = net.edges().iter().map(|&(i, j, _)| Element::Edge(i, j)).collect();
            let n_pairs = elements.len() * elements.len().saturating_sub(1) / 2;
            let pick = if n_pairs > 0 {
                Some(sample(&mut path_rng(job_seed, &[purpose::PAIR_PICK]), n_pairs, 1).index(0))
            } else {
                None
            };
            for &alpha in &cfg.alphas {
                let (rate, flags) = pair_rates(&boot, &elements, Statistic::Edge, alpha)?;
                out.push(("edge_rejection_rate".into(), Some(alpha), rate));
                if let Some(k) = pick {
                    out.push(("edge_random_pair_rejected".into(), Some(alpha), f64::from(u8::from(flags[k]))));
                }
            }
            out.push(("failed_replicates".into(), None, boot.failures().len() as f64));
        }
        Study::CentralityDiff => {
            let boot = nonparametric_boot(&ds, opts, cfg.n_boots, boot_seed, 1)?;
            let nodes: Vec<Element> = (0..cfg.p).map(Element::Node).collect();
            for stat in [Statistic::Strength, Statistic::Closeness, Statistic::Betweenness] {
                for &alpha in &cfg.alphas {
                    let (rate, _) = pair_rates(&boot, &nodes, stat, alpha)?;
                    out.push((format!("{}_rejection_rate", stat.name()), Some(alpha), rate));
                }
            }
            out.push(("failed_replicates".into(), None, boot.failures().len() as f64));
        }
    }
    Ok(out)
}

fn summarize(rewiring: f64, n: usize, metric: &str, alpha: Option<f64>, values: &[f64]) -> MetricSummary {
    let k = values.len();
    let mean = values.iter().sum::<f64>() / k as f64;
    let sd = if k > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| quantile_type6_sorted(&s, p).unwrap_or(f64::NAN);
    MetricSummary {
        rewiring,
        n,
        metric: metric.to_string(),
        alpha,
        count: k,
        mean,
        sd,
        se: sd / (k as f64).sqrt(),
        min: s[0],
        q25: q(0.25),
        median: q(0.5),
        q75: q(0.75),
        max: s[k - 1],
    }
}

/// Run every (condition, replication) job of a study. Failed replications are
/// logged and excluded; callers decide whether the failure rate is acceptable.
pub fn run_study(config: &SimulationConfig, study: Study, workers: usize) -> Result<SimulationResult> {
    config.validate(study)?;
    let conditions = config.conditions();
    let reps = config.replications;
    let n_jobs = conditions.len() * reps;
    let outcomes = map_indexed(n_jobs, workers, |job| {
        let (c, rep) = (job / reps, job % reps);
        let (rewiring, n) = conditions[c];
        let seed = derive_seed(config.base_seed, &[c as u64, rep as u64]);
        run_job(study, config, rewiring, n, seed)
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (job, outcome) in outcomes.into_iter().enumerate() {
        let (c, rep) = (job / reps, job % reps);
        let (rewiring, n) = conditions[c];
        match outcome {
            Ok(metrics) => records.extend(metrics.into_iter().map(|(metric, alpha, value)| SimulationRecord {
                rewiring,
                n,
                replication: rep,
                metric,
                alpha,
                value,
            })),
            Err(e) => failures.push(SimulationFailure {
                rewiring,
                n,
                replication: rep,
                reason: e.to_string(),
            }),
        }
    }

    let mut keys: Vec<(f64, usize, String, Option<f64>)> = Vec::new();
    for r in &records {
        let key = (r.rewiring, r.n, r.metric.clone(), r.alpha);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let summaries = keys
        .iter()
        .map(|(rw, n, metric, alpha)| {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.rewiring == *rw && r.n == *n && &r.metric == metric && r.alpha == *alpha)
                .map(|r| r.value)
                .collect();
            summarize(*rw, *n, metric, *alpha, &v)
        })
        .collect();

    Ok(SimulationResult {
        study,
        config: config.clone(),
        records,
        failures,
        summaries,
        n_jobs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(study: Study) -> SimulationConfig {
        SimulationConfig {
            p: 5,
            rewiring: vec![0.0],
            sample_sizes: vec![300],
            replications: 2,
            n_boots: 20,
            drop_levels: vec![0.2, 0.5],
            alphas: vec![0.1],
            ..SimulationConfig::for_study(study)
        }
    }

    #[test]
    fn study_names_round_trip() {
        for s in [Study::Cs, Study::EdgeDiff, Study::CentralityDiff] {
            assert_eq!(s.name().parse::<Study>().unwrap(), s);
        }
        assert!("nope".parse::<Study>().is_err());
    }

    #[test]
    fn edge_study_defaults() {
        let c = SimulationConfig::for_study(Study::EdgeDiff);
        assert_eq!(c.edge_weight, 0.3);
        assert_eq!(c.rewiring, vec![0.0]);
        assert_eq!(c.alphas, vec![0.05, 0.01, 0.002]);
    }

    #[test]
    fn cs_study_runs_and_is_deterministic() {
        let c = tiny(Study::Cs);
        let a = run_study(&c, Study::Cs, 1).unwrap();
        let b = run_study(&c, Study::Cs, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_jobs, 2);
        assert_eq!(a.values(0.0, 300, "cs_strength", None).len() + a.failures.len(), 2);
    }

    #[test]
    fn rates_are_proportions() {
        let c = tiny(Study::CentralityDiff);
        let r = run_study(&c, Study::CentralityDiff, 1).unwrap();
        for rec in r.records.iter().filter(|r| r.metric.ends_with("rate")) {
            assert!((0.0..=1.0).contains(&rec.value));
        }
    }

    #[test]
    fn invalid_alpha_rejected() {
        let mut c = tiny(Study::EdgeDiff);
        c.alphas = vec![0.01];
        assert!(run_study(&c, Study::EdgeDiff, 1).is_err());
    }
}
