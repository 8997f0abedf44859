use nalgebra::DMatrix;
use serde::Serialize;

use super::glasso::{is_pd, GlassoState};
use super::{precision_to_pcor, EstimationOptions, Estimator, Network, Provenance};
use crate::ingest::Dataset;
use crate::linalg::log_det_pd;
use crate::stats::{correlation_matrix, min_eigenvalue, CorrelationMatrix};
use crate::{Error, Result};

/// Penalty used when every off-diagonal correlation is exactly zero.
const DEGENERATE_LAMBDA: f64 = 1e-10;

/// `n_lambda` values log-spaced from the largest absolute off-diagonal
/// correlation down to that times `lambda_min_ratio`, descending.
pub fn lambda_path(s: &CorrelationMatrix, options: &EstimationOptions) -> Result<Vec<f64>> {
    options.validate()?;
    lambda_path_matrix(s.entries(), options)
}

fn lambda_path_matrix(s: &DMatrix<f64>, options: &EstimationOptions) -> Result<Vec<f64>> {
    let p = s.nrows();
    let mut lmax: f64 = 0.0;
    for j in 0..p {
        for i in 0..j {
            lmax = lmax.max(s[(i, j)].abs());
        }
    }
    if lmax == 0.0 {
        return Err(Error::DegeneratePath);
    }
    let n = options.n_lambda;
    if n == 1 {
        return Ok(vec![lmax]);
    }
    let (hi, lo) = (lmax.ln(), (lmax * options.lambda_min_ratio).ln());
    let mut out: Vec<f64> = (0..n)
        .map(|i| (hi + (lo - hi) * i as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = lmax;
    out[n - 1] = lmax * options.lambda_min_ratio;
    Ok(out)
}

fn loglik_flat(s: &[f64], k: &[f64], p: usize, n: usize, scratch: &mut Vec<f64>) -> Option<f64> {
    let ld = log_det_pd(k, p, scratch)?;
    let tr: f64 = s.iter().zip(k).map(|(a, b)| a * b).sum();
    Some(n as f64 / 2.0 * (ld - tr))
}

fn edge_count_flat(k: &[f64], p: usize) -> usize {
    (0..p)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .filter(|&(i, j)| k[j * p + i] != 0.0)
        .count()
}

fn ebic_from(loglik: f64, edges: usize, n: usize, p: usize, gamma: f64) -> f64 {
    let e = edges as f64;
    -2.0 * loglik + e * (n as f64).ln() + 4.0 * gamma * e * (p as f64).ln()
}

fn check_pair(s: &DMatrix<f64>, k: &DMatrix<f64>) -> Result<usize> {
    let p = s.nrows();
    if s.ncols() != p || k.nrows() != p || k.ncols() != p {
        return Err(Error::InvalidArgument("S and K must be square and the same size".into()));
    }
    Ok(p)
}

fn not_pd(k: &DMatrix<f64>) -> Error {
    Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(k),
    }
}

/// `(n / 2) * (log det K - tr(S K))`, additive constants dropped.
pub fn gaussian_loglik(s: &DMatrix<f64>, k: &DMatrix<f64>, n: usize) -> Result<f64> {
    let p = check_pair(s, k)?;
    let mut scratch = Vec::new();
    loglik_flat(s.as_slice(), k.as_slice(), p, n, &mut scratch).ok_or_else(|| not_pd(k))
}

/// Nonzero entries in the strict upper triangle of `k`.
pub fn edge_count(k: &DMatrix<f64>) -> usize {
    edge_count_flat(k.as_slice(), k.nrows())
}

/// `-2 loglik + E log n + 4 gamma E log p`.
pub fn ebic(s: &DMatrix<f64>, k: &DMatrix<f64>, n: usize, gamma: f64) -> Result<f64> {
    let p = check_pair(s, k)?;
    let ll = gaussian_loglik(s, k, n)?;
    Ok(ebic_from(ll, edge_count(k), n, p, gamma))
}

/// Every successful fit along the penalty path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlassoPath {
    /// Descending.
    pub lambdas: Vec<f64>,
    pub precisions: Vec<DMatrix<f64>>,
    pub ebic_values: Vec<f64>,
    pub edge_counts: Vec<usize>,
    pub selected_index: usize,
    /// Penalties whose fit did not converge or was not positive definite.
    pub failed_lambdas: Vec<f64>,
    /// The path collapsed to a single tiny penalty because S is diagonal.
    pub degenerate: bool,
}

struct Selection {
    lambda: f64,
    precision: Vec<f64>,
    path: Option<GlassoPath>,
}

fn select_glasso(s: &DMatrix<f64>, n: usize, options: &EstimationOptions, keep_path: bool) -> Result<Selection> {
    let p = s.nrows();
    let (lambdas, degenerate) = match lambda_path_matrix(s, options) {
        Ok(l) => (l, false),
        Err(Error::DegeneratePath) => (vec![DEGENERATE_LAMBDA], true),
        Err(e) => return Err(e),
    };

    let mut state = GlassoState::new(s);
    let mut k = Vec::with_capacity(p * p);
    let mut scratch = Vec::with_capacity(p * p);
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut path = GlassoPath {
        lambdas: Vec::new(),
        precisions: Vec::new(),
        ebic_values: Vec::new(),
        edge_counts: Vec::new(),
        selected_index: 0,
        failed_lambdas: Vec::new(),
        degenerate,
    };

    for &lambda in &lambdas {
        if state.fit(lambda, options).is_err() {
            path.failed_lambdas.push(lambda);
            state = GlassoState::new(s);
            continue;
        }
        state.precision_into(&mut k);
        let Some(ll) = loglik_flat(state.s(), &k, p, n, &mut scratch) else {
            path.failed_lambdas.push(lambda);
            continue;
        };
        let edges = edge_count_flat(&k, p);
        let value = ebic_from(ll, edges, n, p, options.gamma);
        // Strict comparison: on ties the earlier, larger penalty wins.
        if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
            if keep_path {
                path.selected_index = path.lambdas.len();
            }
            best = Some((value, lambda, k.clone()));
        }
        if keep_path {
            path.lambdas.push(lambda);
            path.precisions.push(DMatrix::from_column_slice(p, p, &k));
            path.ebic_values.push(value);
            path.edge_counts.push(edges);
        }
    }
    let (_, lambda, precision) = best.ok_or(Error::AllFitsFailed)?;
    debug_assert!(is_pd(&precision, p, &mut scratch));
    Ok(Selection {
        lambda,
        precision,
        path: keep_path.then_some(path),
    })
}

fn pcor_precision(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = s.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(s),
    })?;
    let k = chol.inverse();
    Ok((&k + k.transpose()) * 0.5)
}

/// Selected network weights only; the lean path used inside bootstrap loops.
pub(crate) fn fit_weights(s: &DMatrix<f64>, n: usize, options: &EstimationOptions) -> Result<DMatrix<f64>> {
    let k = match options.estimator {
        Estimator::Pcor => pcor_precision(s)?,
        Estimator::EbicGlasso => {
            let sel = select_glasso(s, n, options, false)?;
            DMatrix::from_column_slice(s.nrows(), s.nrows(), &sel.precision)
        }
    };
    precision_to_pcor(&k)
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub network: Network,
    pub correlation: CorrelationMatrix,
    pub precision: DMatrix<f64>,
    /// `None` for the unregularized estimator.
    pub path: Option<GlassoPath>,
    pub selected_lambda: Option<f64>,
    pub warnings: Vec<String>,
}

/// Estimate a network from an already computed correlation matrix; the sample
/// size is taken from `correlation.n_cases()`.
pub fn estimate_from_correlation(correlation: CorrelationMatrix, options: &EstimationOptions) -> Result<Estimate> {
    options.validate()?;
    let s = correlation.entries();
    let (p, n) = (correlation.p(), correlation.n_cases());
    if p < 2 {
        return Err(Error::InvalidArgument("need at least 2 variables".into()));
    }
    let mut warnings = Vec::new();
    if n <= p {
        warnings.push(format!("n = {n} is not larger than p = {p}; estimates will be unstable"));
    }
    if correlation.psd_repaired() {
        warnings.push("correlation matrix was not positive semi-definite and was repaired".into());
    }
    if !correlation.degenerate_pairs().is_empty() {
        warnings.push(format!(
            "{} polychoric pair(s) at the correlation bound",
            correlation.degenerate_pairs().len()
        ));
    }

    let (precision, path, lambda) = match options.estimator {
        Estimator::Pcor => (pcor_precision(s)?, None, None),
        Estimator::EbicGlasso => {
            let sel = select_glasso(s, n, options, true)?;
            let path = sel.path.expect("path requested");
            if path.degenerate {
                warnings.push("all correlations are zero; the network is empty".into());
            }
            if !path.failed_lambdas.is_empty() {
                warnings.push(format!("{} of the penalty values failed to fit", path.failed_lambdas.len()));
            }
            (DMatrix::from_column_slice(p, p, &sel.precision), Some(path), Some(sel.lambda))
        }
    };
    let weights = precision_to_pcor(&precision)?;
    let network = Network::new(weights, correlation.variable_names().to_vec())?.with_provenance(Provenance::Estimated {
        estimator: options.estimator,
        options: options.clone(),
        lambda,
        n,
        correlation_method: correlation.method(),
        psd_repaired: correlation.psd_repaired(),
    });
    Ok(Estimate {
        network,
        correlation,
        precision,
        path,
        selected_lambda: lambda,
        warnings,
    })
}

/// Correlation matrix, penalty path, EBIC selection and partial correlations.
pub fn estimate_network(dataset: &Dataset, options: &EstimationOptions) -> Result<Estimate> {
    options.validate()?;
    let cor = correlation_matrix(dataset, options.correlation_method)?;
    estimate_from_correlation(cor, options)
}
