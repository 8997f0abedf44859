//! Ground-truth networks, multivariate-normal and ordinal data, and the
//! simulation studies built on them.

mod study;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ggm::{Network, Provenance};
use crate::ingest::{default_names, Dataset, VariableType};
use crate::seed::{path_rng, purpose};
use crate::stats::min_eigenvalue;
use crate::{Error, Result};

pub use study::{
    run_study, MetricSummary, SimulationConfig, SimulationFailure, SimulationRecord, SimulationResult, Study,
};

/// Attempts per variable to draw thresholds that leave no level empty.
pub const MAX_THRESHOLD_DRAWS: usize = 11;

fn labels(p: usize) -> Vec<String> {
    default_names(p)
}

fn from_edges(p: usize, edges: &[(usize, usize, f64)], description: String) -> Result<Network> {
    let mut w = DMatrix::zeros(p, p);
    for &(i, j, v) in edges {
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    Ok(Network::new(w, labels(p))?.with_provenance(Provenance::Generated { description }))
}

/// Ring `0 - 1 - ... - (p-1) - 0` with all weights `magnitude`, of which
/// `round(negative_proportion * p)` are negated at random positions.
pub fn chain_network(p: usize, magnitude: f64, negative_proportion: f64, seed: u64) -> Result<Network> {
    if p < 3 {
        return Err(Error::InvalidArgument(format!("a ring needs at least 3 nodes, got {p}")));
    }
    if !(magnitude > 0.0 && magnitude < 1.0) {
        return Err(Error::InvalidArgument(format!("edge weight must be in (0, 1), got {magnitude}")));
    }
    if !(0.0..=1.0).contains(&negative_proportion) {
        return Err(Error::InvalidArgument(format!(
            "negative proportion must be in [0, 1], got {negative_proportion}"
        )));
    }
    let n_neg = (negative_proportion * p as f64).round() as usize;
    let mut rng = path_rng(seed, &[purpose::NETWORK]);
    let mut sign = vec![1.0; p];
    for k in sample(&mut rng, p, n_neg) {
        sign[k] = -1.0;
    }
    let edges: Vec<_> = (0..p).map(|i| (i, (i + 1) % p, sign[i] * magnitude)).collect();
    from_edges(
        p,
        &edges,
        format!("ring p={p} weight={magnitude} negative={negative_proportion} seed={seed}"),
    )
}

/// Each edge, with the given probability, keeps one uniformly chosen endpoint
/// and moves the other to a uniformly chosen node not already adjacent to the
/// kept one. Weights travel with their edges. Edges are visited in row-major order.
pub fn rewire(network: &Network, probability: f64, seed: u64) -> Result<Network> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::InvalidArgument(format!("probability must be in [0, 1], got {probability}")));
    }
    if probability == 0.0 {
        return Ok(network.clone());
    }
    let p = network.p();
    let mut edges = network.edges();
    let mut adj = vec![vec![false; p]; p];
    for &(i, j, _) in &edges {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let mut rng = path_rng(seed, &[purpose::REWIRE]);
    for e in edges.iter_mut() {
        if !rng.random_bool(probability) {
            continue;
        }
        let (a, b, w) = *e;
        let (keep, old) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        let candidates: Vec<usize> = (0..p).filter(|&v| v != keep && !adj[keep][v]).collect();
        if candidates.is_empty() {
            continue;
        }
        let new = candidates[rng.random_range(0..candidates.len())];
        adj[keep][old] = false;
        adj[old][keep] = false;
        adj[keep][new] = true;
        adj[new][keep] = true;
        *e = (keep.min(new), keep.max(new), w);
    }
    from_edges(p, &edges, format!("rewired probability={probability} seed={seed}"))
}

/// Correlation matrix implied by a partial-correlation network: invert
/// `K = I - W` and rescale to unit diagonal.
pub fn pcor_to_covariance(network: &Network) -> Result<DMatrix<f64>> {
    let p = network.p();
    let k = DMatrix::<f64>::identity(p, p) - network.weights();
    let chol = k.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(&k),
    })?;
    let sigma = chol.inverse();
    let d: Vec<f64> = (0..p).map(|i| sigma[(i, i)].sqrt()).collect();
    let mut out = DMatrix::from_fn(p, p, |i, j| sigma[(i, j)] / (d[i] * d[j]));
    for i in 0..p {
        out[(i, i)] = 1.0;
        for j in 0..i {
            let v = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// `n` rows `L z` with `z` standard normal; only the lower triangle of `l` is read.
pub(crate) fn sample_mvn_with<R: Rng + ?Sized>(l: &DMatrix<f64>, n: usize, rng: &mut R) -> DMatrix<f64> {
    let p = l.nrows();
    let mut out = DMatrix::zeros(n, p);
    let mut z = vec![0.0; p];
    for r in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..p {
            let mut acc = 0.0;
            for (k, zk) in z.iter().enumerate().take(i + 1) {
                acc += l[(i, k)] * zk;
            }
            out[(r, i)] = acc;
        }
    }
    out
}

/// `n` independent draws from N(0, covariance) as an `n x p` matrix.
pub fn sample_mvn(covariance: &DMatrix<f64>, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let chol = covariance
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(covariance),
        })?;
    let mut rng = path_rng(seed, &[purpose::SAMPLE]);
    Ok(sample_mvn_with(chol.l_dirty(), n, &mut rng))
}

/// Cut each column at `n_levels - 1` sorted standard-normal thresholds,
/// redrawing a column's thresholds while any level would be empty.
pub fn ordinalize(data: &DMatrix<f64>, n_levels: usize, seed: u64) -> Result<Dataset> {
    if n_levels < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 levels, got {n_levels}")));
    }
    let (n, p) = data.shape();
    if n < n_levels {
        return Err(Error::InvalidArgument(format!("{n} cases cannot fill {n_levels} levels")));
    }
    let mut rng = path_rng(seed, &[purpose::ORDINALIZE]);
    let mut out = DMatrix::zeros(n, p);
    let mut thr = vec![0.0; n_levels - 1];
    let mut counts = vec![0usize; n_levels];
    for j in 0..p {
        let mut ok = false;
        for _ in 0..MAX_THRESHOLD_DRAWS {
            for t in thr.iter_mut() {
                *t = rng.sample(StandardNormal);
            }
            thr.sort_by(f64::total_cmp);
            counts.iter_mut().for_each(|c| *c = 0);
            for i in 0..n {
                let level = thr.partition_point(|&t| t < data[(i, j)]);
                out[(i, j)] = level as f64;
                counts[level] += 1;
            }
            if counts.iter().all(|&c| c > 0) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::InvalidData(format!(
                "column {j}: some of {n_levels} levels stayed empty after {MAX_THRESHOLD_DRAWS} threshold draws"
            )));
        }
    }
    let levels: Vec<f64> = (0..n_levels).map(|l| l as f64).collect();
    Dataset::new(out, labels(p))?.with_types(vec![VariableType::Ordinal { levels }; p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggm::precision_to_pcor;

    #[test]
    fn ring_shape() {
        let net = chain_network(10, 0.25, 0.5, 3).unwrap();
        let e = net.edges();
        assert_eq!(e.len(), 10);
        assert_eq!(e.iter().filter(|x| x.2 < 0.0).count(), 5);
        assert!(e.iter().all(|x| x.2.abs() == 0.25));
        for i in 0..10 {
            assert_eq!((0..10).filter(|&j| net.weight(i, j) != 0.0).count(), 2);
        }
        assert!(chain_network(10, 0.25, 0.0, 3).unwrap().edges().iter().all(|x| x.2 == 0.25));
        assert!(chain_network(2, 0.25, 0.0, 3).is_err());
    }

    #[test]
    fn rewire_conserves_edges() {
        let net = chain_network(10, 0.25, 0.5, 1).unwrap();
        assert_eq!(rewire(&net, 0.0, 9).unwrap(), net);
        let r1 = rewire(&net, 1.0, 9).unwrap();
        assert_eq!(r1, rewire(&net, 1.0, 9).unwrap());
        assert_ne!(r1.weights(), net.weights());
        let mut a: Vec<f64> = net.edges().iter().map(|e| e.2).collect();
        let mut b: Vec<f64> = r1.edges().iter().map(|e| e.2).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        for i in 0..10 {
            assert_eq!(r1.weight(i, i), 0.0);
        }
    }

    #[test]
    fn covariance_round_trip() {
        let net = chain_network(10, 0.25, 0.5, 4).unwrap();
        let cov = pcor_to_covariance(&net).unwrap();
        let back = precision_to_pcor(&cov.clone().try_inverse().unwrap()).unwrap();
        assert!((back - net.weights()).abs().max() < 1e-10);
        let empty = Network::new(DMatrix::zeros(4, 4), labels(4)).unwrap();
        assert_eq!(pcor_to_covariance(&empty).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn non_pd_network_rejected() {
        let mut w = DMatrix::from_element(4, 4, 0.6);
        w.fill_diagonal(0.0);
        let net = Network::new(w, labels(4)).unwrap();
        assert!(matches!(pcor_to_covariance(&net), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn mvn_is_seeded() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let a = sample_mvn(&cov, 50, 1).unwrap();
        assert_eq!(a, sample_mvn(&cov, 50, 1).unwrap());
        assert_ne!(a, sample_mvn(&cov, 50, 2).unwrap());
        assert_eq!(a.shape(), (50, 2));
    }

    #[test]
    fn ordinal_levels_all_occupied() {
        let x = sample_mvn(&DMatrix::identity(3, 3), 300, 5).unwrap();
        let ds = ordinalize(&x, 4, 5).unwrap();
        for j in 0..3 {
            let col = ds.column(j);
            for l in 0..4 {
                assert!(col.iter().any(|&v| v == l as f64));
            }
            // rank order preserved
            for a in 0..300 {
                for b in 0..300 {
                    if x[(a, j)] < x[(b, j)] {
                        assert!(col[a] <= col[b]);
                    }
                }
            }
        }
        let bin = ordinalize(&x, 2, 5).unwrap();
        assert!(bin.values().iter().all(|&v| v == 0.0 || v == 1.0));
    }
}
