//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sample correlation matrix of `n` draws of `p` correlated normals.
pub fn random_correlation(p: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mix = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let z = DMatrix::from_fn(n, p, |_, _| {
        let u: f64 = rng.random_range(1e-12..1.0);
        let v: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    });
    let x = z * mix;
    let mut c = DMatrix::zeros(p, p);
    let means: Vec<f64> = (0..p).map(|j| x.column(j).mean()).collect();
    for i in 0..p {
        for j in 0..p {
            let s: f64 = (0..n).map(|r| (x[(r, i)] - means[i]) * (x[(r, j)] - means[j])).sum();
            c[(i, j)] = s;
        }
    }
    let d: Vec<f64> = (0..p).map(|i| c[(i, i)].sqrt()).collect();
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { c[(i, j)] / (d[i] * d[j]) })
}

fn smooth_part(s: &DMatrix<f64>, k: &DMatrix<f64>) -> Option<f64> {
    let chol = k.clone().cholesky()?;
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Some(-logdet + s.component_mul(k).sum())
}

fn penalty(k: &DMatrix<f64>, lambda: f64, diag: bool) -> f64 {
    let mut pen = 0.0;
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            if i != j || diag {
                pen += k[(i, j)].abs();
            }
        }
    }
    lambda * pen
}

/// Minimizer of `-log det K + tr(SK) + lambda * sum |K_ij|` by proximal
/// gradient descent with backtracking, run to a tight tolerance.
pub fn glasso_oracle(s: &DMatrix<f64>, lambda: f64, penalize_diagonal: bool) -> DMatrix<f64> {
    let p = s.nrows();
    let mut k = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 / (s[(i, i)] + lambda) } else { 0.0 });
    let mut t = 1.0;
    for _ in 0..500_000 {
        let f = smooth_part(s, &k).expect("iterate stays PD");
        let inv = k.clone().try_inverse().expect("invertible");
        let grad = s - &inv;
        let next = loop {
            let step = &k - &grad * t;
            let cand = DMatrix::from_fn(p, p, |i, j| {
                let v = step[(i, j)];
                if i == j && !penalize_diagonal {
                    v
                } else {
                    v.signum() * (v.abs() - t * lambda).max(0.0)
                }
            });
            let d = &cand - &k;
            if let Some(fc) = smooth_part(s, &cand) {
                if fc <= f + grad.component_mul(&d).sum() + d.norm_squared() / (2.0 * t) + 1e-15 {
                    break cand;
                }
            }
            t *= 0.5;
        };
        let change = (&next - &k).amax();
        k = next;
        t *= 1.5;
        if change < 1e-13 {
            break;
        }
    }
    k
}

pub fn penalized_objective(s: &DMatrix<f64>, k: &DMatrix<f64>, lambda: f64, diag: bool) -> f64 {
    smooth_part(s, k).map_or(f64::INFINITY, |f| f + penalty(k, lambda, diag))
}

/// Closeness and betweenness by listing every simple path between every pair.
pub struct PathOracle {
    pub distance: DMatrix<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
}

fn simple_paths(w: &DMatrix<f64>, from: usize, to: usize) -> Vec<(f64, Vec<usize>)> {
    fn go(
        w: &DMatrix<f64>,
        at: usize,
        to: usize,
        len: f64,
        path: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if at == to {
            out.push((len, path.clone()));
            return;
        }
        for next in 0..w.nrows() {
            if w[(at, next)] != 0.0 && !path.contains(&next) {
                path.push(next);
                go(w, next, to, len + 1.0 / w[(at, next)].abs(), path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(w, from, to, 0.0, &mut vec![from], &mut out);
    out
}

pub fn path_oracle(w: &DMatrix<f64>) -> PathOracle {
    let p = w.nrows();
    let mut distance = DMatrix::from_element(p, p, f64::INFINITY);
    let mut betweenness = vec![0.0; p];
    for s in 0..p {
        distance[(s, s)] = 0.0;
        for t in (s + 1)..p {
            let paths = simple_paths(w, s, t);
            let Some(best) = paths.iter().map(|(l, _)| *l).min_by(f64::total_cmp) else {
                continue;
            };
            distance[(s, t)] = best;
            distance[(t, s)] = best;
            let shortest: Vec<&Vec<usize>> =
                paths.iter().filter(|(l, _)| *l <= best * (1.0 + 1e-9)).map(|(_, v)| v).collect();
            let total = shortest.len() as f64;
            for (v, b) in betweenness.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|path| path.contains(&v)).count() as f64;
                *b += through / total;
            }
        }
    }
    let closeness = (0..p)
        .map(|i| {
            let reach: Vec<f64> = (0..p)
                .filter(|&j| j != i && distance[(i, j)].is_finite())
                .map(|j| distance[(i, j)])
                .collect();
            if reach.is_empty() {
                0.0
            } else {
                reach.len() as f64 / reach.iter().sum::<f64>()
            }
        })
        .collect();
    PathOracle {
        distance,
        closeness,
        betweenness,
    }
}

/// Symmetric weight matrix; each pair is an edge with probability `density`,
/// weights drawn from a small set so that equal-length paths occur often.
pub fn random_weights(p: usize, density: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    const MAGNITUDES: [f64; 5] = [0.2, 0.25, 0.4, 0.5, 0.8];
    let mut w = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random_bool(density) {
                let m = MAGNITUDES[rng.random_range(0..MAGNITUDES.len())];
                let v = if rng.random_bool(0.5) { m } else { -m };
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    w
}

pub fn labels(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("V{i}")).collect()
}
