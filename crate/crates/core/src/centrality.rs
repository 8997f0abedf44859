//! Node centrality on weighted networks: strength, closeness and betweenness.
//!
//! Distances use edge length `1 / |w|`, so stronger edges are shorter. Signs
//! never matter. Closeness on a disconnected graph is computed within the
//! reachable set as `(r - 1) / sum(d)`. Betweenness counts unordered pairs
//! with fractional credit for tied shortest paths (Brandes).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ggm::Network;
use crate::{Error, Result};

/// Two path lengths within this relative distance count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityIndex {
    Strength,
    Closeness,
    Betweenness,
}

impl CentralityIndex {
    pub const ALL: [CentralityIndex; 3] = [
        CentralityIndex::Strength,
        CentralityIndex::Closeness,
        CentralityIndex::Betweenness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CentralityIndex::Strength => "strength",
            CentralityIndex::Closeness => "closeness",
            CentralityIndex::Betweenness => "betweenness",
        }
    }
}

impl std::fmt::Display for CentralityIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CentralityIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strength" => Ok(CentralityIndex::Strength),
            "closeness" => Ok(CentralityIndex::Closeness),
            "betweenness" => Ok(CentralityIndex::Betweenness),
            other => Err(Error::InvalidArgument(format!("unknown centrality index {other:?}"))),
        }
    }
}

fn check_node(network: &Network, node: usize) -> Result<()> {
    if node >= network.p() {
        return Err(Error::NodeOutOfRange {
            index: node,
            len: network.p(),
        });
    }
    Ok(())
}

pub(crate) fn strength_all(w: &DMatrix<f64>) -> Vec<f64> {
    let p = w.nrows();
    (0..p)
        .map(|i| (0..p).filter(|&j| j != i).map(|j| w[(i, j)].abs()).sum())
        .collect()
}

/// Sum of absolute edge weights at `node`.
pub fn strength(network: &Network, node: usize) -> Result<f64> {
    check_node(network, node)?;
    Ok(strength_all(network.weights())[node])
}

fn edge_length(w: f64) -> f64 {
    1.0 / w.abs()
}

/// Single-source Dijkstra with Brandes bookkeeping. Fills `dist`, `sigma`,
/// `preds` and the settle `order`.
struct Sssp {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
    order: Vec<usize>,
    done: Vec<bool>,
}

impl Sssp {
    fn new(p: usize) -> Self {
        Sssp {
            dist: vec![f64::INFINITY; p],
            sigma: vec![0.0; p],
            preds: vec![Vec::new(); p],
            order: Vec::with_capacity(p),
            done: vec![false; p],
        }
    }

    fn run(&mut self, w: &DMatrix<f64>, source: usize) {
        let p = w.nrows();
        self.dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        self.sigma.iter_mut().for_each(|s| *s = 0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.done.iter_mut().for_each(|d| *d = false);
        self.order.clear();
        self.dist[source] = 0.0;
        self.sigma[source] = 1.0;

        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..p {
                if !self.done[v] && self.dist[v] < best {
                    best = self.dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            self.done[u] = true;
            self.order.push(u);
            for v in 0..p {
                let wv = w[(u, v)];
                if v == u || wv == 0.0 || self.done[v] {
                    continue;
                }
                let alt = self.dist[u] + edge_length(wv);
                let tol = TIE_TOLERANCE * alt;
                if alt < self.dist[v] - tol {
                    self.dist[v] = alt;
                    self.sigma[v] = self.sigma[u];
                    self.preds[v].clear();
                    self.preds[v].push(u);
                } else if (alt - self.dist[v]).abs() <= tol {
                    self.sigma[v] += self.sigma[u];
                    self.preds[v].push(u);
                }
            }
        }
    }
}

pub(crate) fn distances_of(w: &DMatrix<f64>) -> DMatrix<f64> {
    let p = w.nrows();
    let mut out = DMatrix::from_element(p, p, f64::INFINITY);
    let mut sp = Sssp::new(p);
    for s in 0..p {
        sp.run(w, s);
        for t in 0..p {
            out[(s, t)] = sp.dist[t];
        }
    }
    // Row s and column s come from different Dijkstra runs; make exact.
    for i in 0..p {
        for j in 0..i {
            let v = out[(i, j)].min(out[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// All-pairs shortest path lengths under edge length `1 / |w|`; unreachable
/// pairs are infinite.
pub fn shortest_distances(network: &Network) -> DMatrix<f64> {
    distances_of(network.weights())
}

fn closeness_from(d: &DMatrix<f64>) -> Vec<f64> {
    let p = d.nrows();
    (0..p)
        .map(|i| {
            let (mut r, mut sum) = (1usize, 0.0);
            for j in 0..p {
                if j != i && d[(i, j)].is_finite() {
                    r += 1;
                    sum += d[(i, j)];
                }
            }
            if r == 1 {
                0.0
            } else {
                (r - 1) as f64 / sum
            }
        })
        .collect()
}

pub fn closeness(network: &Network, node: usize) -> Result<f64> {
    check_node(network, node)?;
    Ok(closeness_from(&shortest_distances(network))[node])
}

pub(crate) fn betweenness_all(w: &DMatrix<f64>) -> Vec<f64> {
    let p = w.nrows();
    let mut bc = vec![0.0; p];
    let mut delta = vec![0.0; p];
    let mut sp = Sssp::new(p);
    for s in 0..p {
        sp.run(w, s);
        delta.iter_mut().for_each(|d| *d = 0.0);
        for &v in sp.order.iter().rev() {
            for &u in &sp.preds[v] {
                delta[u] += sp.sigma[u] / sp.sigma[v] * (1.0 + delta[v]);
            }
            if v != s {
                bc[v] += delta[v];
            }
        }
    }
    // Every unordered pair was visited from both ends.
    bc.iter_mut().for_each(|b| *b /= 2.0);
    bc
}

pub fn betweenness(network: &Network, node: usize) -> Result<f64> {
    check_node(network, node)?;
    Ok(betweenness_all(network.weights())[node])
}

/// Raw indices, computed from a weight matrix directly.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Centralities {
    pub strength: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
}

impl Centralities {
    pub fn of(w: &DMatrix<f64>) -> Self {
        Centralities {
            strength: strength_all(w),
            closeness: closeness_from(&distances_of(w)),
            betweenness: betweenness_all(w),
        }
    }
}

/// `(x - mean) / sd` with the population sd; all zeros when `x` is constant.
pub fn z_scores(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    if x.is_empty() {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(sd > 1e-10 * scale) {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - mean) / sd).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityTable {
    pub labels: Vec<String>,
    pub strength: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub z_strength: Vec<f64>,
    pub z_closeness: Vec<f64>,
    pub z_betweenness: Vec<f64>,
}

impl CentralityTable {
    pub fn raw(&self, index: CentralityIndex) -> &[f64] {
        match index {
            CentralityIndex::Strength => &self.strength,
            CentralityIndex::Closeness => &self.closeness,
            CentralityIndex::Betweenness => &self.betweenness,
        }
    }

    pub fn z(&self, index: CentralityIndex) -> &[f64] {
        match index {
            CentralityIndex::Strength => &self.z_strength,
            CentralityIndex::Closeness => &self.z_closeness,
            CentralityIndex::Betweenness => &self.z_betweenness,
        }
    }
}

pub fn centrality_table(network: &Network) -> CentralityTable {
    let c = Centralities::of(network.weights());
    CentralityTable {
        labels: network.labels().to_vec(),
        z_strength: z_scores(&c.strength),
        z_closeness: z_scores(&c.closeness),
        z_betweenness: z_scores(&c.betweenness),
        strength: c.strength,
        closeness: c.closeness,
        betweenness: c.betweenness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(p: usize, edges: &[(usize, usize, f64)]) -> Network {
        let mut w = DMatrix::zeros(p, p);
        for &(i, j, v) in edges {
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
        Network::new(w, (0..p).map(|i| format!("n{i}")).collect()).unwrap()
    }

    fn ring(p: usize, c: f64) -> Network {
        let edges: Vec<_> = (0..p).map(|i| (i, (i + 1) % p, if i % 2 == 0 { c } else { -c })).collect();
        net(p, &edges)
    }

    #[test]
    fn strength_examples() {
        let n = net(3, &[(0, 1, 0.3), (0, 2, -0.2)]);
        assert!((strength(&n, 0).unwrap() - 0.5).abs() < 1e-15);
        let iso = net(3, &[(0, 1, 0.3)]);
        assert_eq!(strength(&iso, 2).unwrap(), 0.0);
        assert!(strength(&iso, 3).is_err());
        let r = ring(8, 0.3);
        for i in 0..8 {
            assert!((strength(&r, i).unwrap() - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn distance_examples() {
        let d = shortest_distances(&net(3, &[]));
        assert!(d[(0, 1)].is_infinite() && d[(0, 0)] == 0.0);
        let d = shortest_distances(&net(3, &[(0, 1, 0.5), (1, 2, 0.5)]));
        assert!((d[(0, 2)] - 4.0).abs() < 1e-12);
        let d = shortest_distances(&net(3, &[(0, 1, 0.1), (1, 2, 0.1), (0, 2, 0.5)]));
        assert!((d[(0, 2)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn path_graph_indices() {
        let n = net(3, &[(0, 1, 0.99999), (1, 2, -0.99999)]);
        let unit = net(3, &[(0, 1, 0.5), (1, 2, 0.5)]);
        let c = closeness(&unit, 1).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        assert!((closeness(&unit, 0).unwrap() - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(betweenness(&n, 1).unwrap(), 1.0);
        assert_eq!(betweenness(&n, 0).unwrap(), 0.0);
        assert_eq!(closeness(&net(3, &[(0, 1, 0.5)]), 2).unwrap(), 0.0);
    }

    #[test]
    fn complete_equal_graph_has_no_betweenness() {
        let mut e = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                e.push((i, j, 0.2));
            }
        }
        assert!(betweenness_all(net(4, &e).weights()).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn square_splits_ties() {
        // 4-cycle: each opposite pair has two geodesics.
        let n = net(4, &[(0, 1, 0.3), (1, 2, 0.3), (2, 3, 0.3), (3, 0, 0.3)]);
        for i in 0..4 {
            assert!((betweenness(&n, i).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_is_uniform() {
        let t = centrality_table(&ring(8, 0.25));
        for idx in CentralityIndex::ALL {
            let v = t.raw(idx);
            assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-12), "{idx}");
            assert!(t.z(idx).iter().all(|z| z.abs() < 1e-12));
        }
    }

    #[test]
    fn z_scores_standardize() {
        let z = z_scores(&[1.0, 2.0, 3.0, 6.0]);
        let m: f64 = z.iter().sum::<f64>() / 4.0;
        let v: f64 = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 4.0;
        assert!(m.abs() < 1e-14 && (v - 1.0).abs() < 1e-12);
        assert_eq!(z_scores(&[0.3, 0.3, 0.3]), vec![0.0; 3]);
        assert_eq!(z_scores(&[0.0, 0.0]), vec![0.0; 2]);
    }
}
