//! Percentile intervals, edge-weight CIs and bootstrapped difference tests.

use serde::{Deserialize, Serialize};

use super::{BootstrapResult, Replicate};
use crate::centrality::CentralityIndex;
use crate::stats::quantile_type6_sorted;
use crate::{Error, Result};

/// Narrowest two-sided level a run of `n_boots` replicates supports.
pub fn alpha_floor(n_boots: usize) -> f64 {
    2.0 / n_boots as f64
}

pub fn check_alpha(alpha: f64, n_boots: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let floor = alpha_floor(n_boots);
    if alpha < floor * (1.0 - 1e-9) {
        return Err(Error::AlphaBelowFloor {
            alpha,
            floor,
            n_boots,
        });
    }
    Ok(())
}

/// Two-sided percentile interval from type-6 quantiles at `alpha/2` and
/// `1 - alpha/2`. When `alpha/2` is at most one replicate's worth of
/// probability the interval is the sample range: with `alpha = 2/N` the
/// bounds are the two most extreme replicates.
pub fn percentile_interval(values: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("no replicate values".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN replicate value".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if alpha * n as f64 / 2.0 <= 1.0 + 1e-9 {
        return Ok((s[0], s[n - 1]));
    }
    Ok((quantile_type6_sorted(&s, alpha / 2.0)?, upper_quantile(&s, alpha / 2.0)))
}

/// Type-6 quantile at `1 - prob`, computed as the mirror image of the lower
/// one so that negating the sample negates and swaps the bounds exactly.
fn upper_quantile(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    let h = (prob * (n as f64 + 1.0)).clamp(1.0, n as f64);
    let lo = h.floor();
    let i = lo as usize - 1;
    if i + 1 >= n {
        return sorted[0];
    }
    let (a, b) = (sorted[n - 1 - i], sorted[n - 2 - i]);
    a + (h - lo) * (b - a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeCi {
    pub i: usize,
    pub j: usize,
    /// Weight in the reference network.
    pub sample: f64,
    /// Mean over successful replicates.
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    /// Share of replicates in which the edge is nonzero.
    pub nonzero_proportion: f64,
}

fn successes_or_err(result: &BootstrapResult) -> Result<Vec<&Replicate>> {
    let reps: Vec<&Replicate> = result.successes().collect();
    if reps.is_empty() {
        return Err(Error::AllFitsFailed);
    }
    Ok(reps)
}

/// Interval for every candidate edge, in row-major `(i < j)` order.
pub fn edge_ci(result: &BootstrapResult, alpha: f64) -> Result<Vec<EdgeCi>> {
    check_alpha(alpha, result.n_boots)?;
    let reps = successes_or_err(result)?;
    let p = result.p();
    let mut out = Vec::with_capacity(p * (p - 1) / 2);
    let mut vals = Vec::with_capacity(reps.len());
    for i in 0..p {
        for j in (i + 1)..p {
            vals.clear();
            vals.extend(reps.iter().map(|r| r.weights[(i, j)]));
            let (lower, upper) = percentile_interval(&vals, alpha)?;
            out.push(EdgeCi {
                i,
                j,
                sample: result.reference.weight(i, j),
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                lower,
                upper,
                nonzero_proportion: vals.iter().filter(|&&v| v != 0.0).count() as f64 / vals.len() as f64,
            });
        }
    }
    Ok(out)
}

/// Display order for CI plots: by sample weight, ties broken by the replicate
/// mean, then by position.
pub fn edge_plot_order(cis: &[EdgeCi]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..cis.len()).collect();
    idx.sort_by(|&a, &b| {
        cis[a]
            .sample
            .total_cmp(&cis[b].sample)
            .then(cis[a].mean.total_cmp(&cis[b].mean))
            .then(a.cmp(&b))
    });
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Edge,
    Strength,
    Closeness,
    Betweenness,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Edge => "edge",
            Statistic::Strength => "strength",
            Statistic::Closeness => "closeness",
            Statistic::Betweenness => "betweenness",
        }
    }

    pub fn centrality(self) -> Option<CentralityIndex> {
        match self {
            Statistic::Edge => None,
            Statistic::Strength => Some(CentralityIndex::Strength),
            Statistic::Closeness => Some(CentralityIndex::Closeness),
            Statistic::Betweenness => Some(CentralityIndex::Betweenness),
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edge" => Ok(Statistic::Edge),
            "strength" => Ok(Statistic::Strength),
            "closeness" => Ok(Statistic::Closeness),
            "betweenness" => Ok(Statistic::Betweenness),
            other => Err(Error::InvalidArgument(format!("unknown statistic {other:?}"))),
        }
    }
}

/// A node, or an undirected edge stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Node(usize),
    Edge(usize, usize),
}

impl Element {
    pub fn edge(a: usize, b: usize) -> Element {
        Element::Edge(a.min(b), a.max(b))
    }

    pub fn label(&self, labels: &[String]) -> String {
        match *self {
            Element::Node(i) => labels[i].clone(),
            Element::Edge(i, j) => format!("{}--{}", labels[i], labels[j]),
        }
    }

    /// Parse a user-facing identifier: a node is a 1-based index or a label;
    /// an edge is two nodes joined by `-` (or `--`), e.g. `1-2` or `A--B`.
    pub fn parse(s: &str, statistic: Statistic, labels: &[String]) -> Result<Element> {
        let unknown = || Error::UnknownElement(s.to_owned());
        let node = |t: &str| -> Result<usize> {
            let t = t.trim();
            if let Some(k) = labels.iter().position(|l| l == t) {
                return Ok(k);
            }
            match t.parse::<usize>() {
                Ok(k) if (1..=labels.len()).contains(&k) => Ok(k - 1),
                _ => Err(unknown()),
            }
        };
        let e = if statistic == Statistic::Edge {
            if labels.iter().any(|l| l == s.trim()) {
                return Err(unknown());
            }
            let (a, b) = s
                .split_once("--")
                .or_else(|| s.split_once('-'))
                .ok_or_else(unknown)?;
            Element::edge(node(a)?, node(b)?)
        } else {
            Element::Node(node(s)?)
        };
        e.validate(statistic, labels.len()).map_err(|_| unknown())
    }

    fn validate(self, statistic: Statistic, p: usize) -> Result<Element> {
        match (self, statistic) {
            (Element::Edge(a, b), Statistic::Edge) => {
                for k in [a, b] {
                    if k >= p {
                        return Err(Error::NodeOutOfRange { index: k, len: p });
                    }
                }
                if a == b {
                    return Err(Error::UnknownElement(format!("edge {a}-{b} is a self-loop")));
                }
                Ok(Element::edge(a, b))
            }
            (Element::Node(i), s) if s != Statistic::Edge => {
                if i >= p {
                    return Err(Error::NodeOutOfRange { index: i, len: p });
                }
                Ok(self)
            }
            (e, s) => Err(Error::UnknownElement(format!(
                "{e:?} is not a valid element for the {} statistic",
                s.name()
            ))),
        }
    }

    fn value(self, statistic: Statistic, r: &Replicate) -> f64 {
        match (self, statistic.centrality()) {
            (Element::Edge(i, j), _) => r.weights[(i, j)],
            (Element::Node(i), Some(c)) => r.centrality(c)[i],
            (Element::Node(_), None) => unreachable!("validated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceTestResult {
    pub statistic: Statistic,
    pub element_a: String,
    pub element_b: String,
    pub alpha: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Zero lies outside the interval.
    pub significant: bool,
    /// Both elements are the same; the interval is (0, 0).
    pub identical: bool,
    pub n_replicates: usize,
}

fn test_pair(
    reps: &[&Replicate],
    a: Element,
    b: Element,
    statistic: Statistic,
    alpha: f64,
    labels: &[String],
    buf: &mut Vec<f64>,
) -> Result<DifferenceTestResult> {
    buf.clear();
    buf.extend(reps.iter().map(|r| a.value(statistic, r) - b.value(statistic, r)));
    let (lo, hi) = percentile_interval(buf, alpha)?;
    Ok(DifferenceTestResult {
        statistic,
        element_a: a.label(labels),
        element_b: b.label(labels),
        alpha,
        ci_lower: lo,
        ci_upper: hi,
        significant: lo > 0.0 || hi < 0.0,
        identical: a == b,
        n_replicates: reps.len(),
    })
}

/// CI of the per-replicate difference `stat(a) - stat(b)`.
pub fn difference_test(
    result: &BootstrapResult,
    a: Element,
    b: Element,
    statistic: Statistic,
    alpha: f64,
) -> Result<DifferenceTestResult> {
    check_alpha(alpha, result.n_boots)?;
    let p = result.p();
    let (a, b) = (a.validate(statistic, p)?, b.validate(statistic, p)?);
    let reps = successes_or_err(result)?;
    test_pair(&reps, a, b, statistic, alpha, result.labels(), &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceMatrix {
    pub statistic: Statistic,
    pub alpha: f64,
    pub elements: Vec<Element>,
    pub element_labels: Vec<String>,
    /// `significant[a][b]`; `None` on the diagonal.
    pub significant: Vec<Vec<Option<bool>>>,
    /// One test per unordered pair, `a < b` in element order.
    pub tests: Vec<DifferenceTestResult>,
}

impl DifferenceMatrix {
    pub fn n_tests(&self) -> usize {
        self.tests.len()
    }
}

/// All pairwise difference tests among nodes, or among candidate edges
/// (restricted to edges nonzero in the reference network with `only_nonzero`).
/// No multiple-testing correction is applied.
pub fn difference_matrix(
    result: &BootstrapResult,
    statistic: Statistic,
    alpha: f64,
    only_nonzero: bool,
) -> Result<DifferenceMatrix> {
    check_alpha(alpha, result.n_boots)?;
    let p = result.p();
    let elements: Vec<Element> = match statistic {
        Statistic::Edge => (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| Element::Edge(i, j)))
            .filter(|&e| match e {
                Element::Edge(i, j) => !only_nonzero || result.reference.weight(i, j) != 0.0,
                Element::Node(_) => unreachable!(),
            })
            .collect(),
        _ => (0..p).map(Element::Node).collect(),
    };
    let reps = successes_or_err(result)?;
    let k = elements.len();
    let mut significant = vec![vec![None; k]; k];
    let mut tests = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    let mut buf = Vec::with_capacity(reps.len());
    for a in 0..k {
        for b in (a + 1)..k {
            let t = test_pair(&reps, elements[a], elements[b], statistic, alpha, result.labels(), &mut buf)?;
            significant[a][b] = Some(t.significant);
            significant[b][a] = Some(t.significant);
            tests.push(t);
        }
    }
    Ok(DifferenceMatrix {
        statistic,
        alpha,
        element_labels: elements.iter().map(|e| e.label(result.labels())).collect(),
        elements,
        significant,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_elements() {
        let labels: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        assert_eq!(Element::parse("2", Statistic::Strength, &labels).unwrap(), Element::Node(1));
        assert_eq!(Element::parse("C", Statistic::Closeness, &labels).unwrap(), Element::Node(2));
        assert_eq!(Element::parse("1-2", Statistic::Edge, &labels).unwrap(), Element::Edge(0, 1));
        assert_eq!(Element::parse("C--A", Statistic::Edge, &labels).unwrap(), Element::Edge(0, 2));
        for bad in ["0", "4", "D", "1-1", "1-4"] {
            let stat = if bad.contains('-') { Statistic::Edge } else { Statistic::Strength };
            assert!(matches!(Element::parse(bad, stat, &labels), Err(Error::UnknownElement(_))));
        }
        assert!(Element::parse("1", Statistic::Edge, &labels).is_err());
        assert!(Element::parse("1-2", Statistic::Strength, &labels).is_err());
    }

    #[test]
    fn interval_examples() {
        assert_eq!(percentile_interval(&[0.3; 50], 0.05).unwrap(), (0.3, 0.3));
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        let (lo, hi) = percentile_interval(&v, 0.05).unwrap();
        assert!((lo - 25.025).abs() < 1e-9 && (hi - 975.975).abs() < 1e-9);
        assert_eq!(percentile_interval(&v, 0.002).unwrap(), (1.0, 1000.0));
    }

    #[test]
    fn mirrored_upper_bound_is_the_type6_quantile() {
        let v: Vec<f64> = (0..37).map(|k| ((k * 7919) % 101) as f64 / 13.0).collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        for prob in [0.0, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5] {
            let direct = quantile_type6_sorted(&s, 1.0 - prob).unwrap();
            assert!((upper_quantile(&s, prob) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_floor_enforced() {
        assert!(check_alpha(0.002, 1000).is_ok());
        assert!(matches!(check_alpha(0.001, 1000), Err(Error::AlphaBelowFloor { .. })));
        assert!(check_alpha(0.0, 1000).is_err());
    }

    #[test]
    fn element_validation() {
        assert_eq!(Element::edge(3, 1), Element::Edge(1, 3));
        assert!(Element::Edge(1, 1).validate(Statistic::Edge, 4).is_err());
        assert!(Element::Edge(1, 5).validate(Statistic::Edge, 4).is_err());
        assert!(Element::Node(1).validate(Statistic::Edge, 4).is_err());
        assert!(Element::Edge(0, 1).validate(Statistic::Strength, 4).is_err());
        assert!(Element::Node(3).validate(Statistic::Closeness, 4).is_ok());
    }
}
