//! Graphical lasso by block coordinate descent (Friedman, Hastie & Tibshirani).
//!
//! The working covariance `W` is updated one column at a time; each column
//! solves a lasso problem in `beta` by cyclic coordinate descent. Everything is
//! kept in flat column-major buffers so that a whole penalty path can be run
//! with warm starts and no per-fit allocation.

use nalgebra::DMatrix;

use super::EstimationOptions;
use crate::linalg::{cholesky_in_place, log_det_pd};
use crate::stats::min_eigenvalue;
use crate::{Error, Result};

const MAX_INNER_SWEEPS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct GlassoFit {
    pub precision: DMatrix<f64>,
    /// Final working covariance, the inverse of `precision` at convergence.
    pub covariance: DMatrix<f64>,
    pub iterations: usize,
}

#[inline]
fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Reusable solver state. Successive calls to [`GlassoState::fit`] warm-start
/// from the previous solution.
#[derive(Debug, Clone)]
pub(crate) struct GlassoState {
    p: usize,
    s: Vec<f64>,
    w: Vec<f64>,
    /// Column j holds the lasso coefficients of node j on the others.
    beta: Vec<f64>,
    u: Vec<f64>,
    started: bool,
}

impl GlassoState {
    pub fn new(s: &DMatrix<f64>) -> Self {
        let p = s.nrows();
        GlassoState {
            p,
            s: s.as_slice().to_vec(),
            w: s.as_slice().to_vec(),
            beta: vec![0.0; p * p],
            u: vec![0.0; p],
            started: false,
        }
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// Solve at `lambda`; returns the number of outer sweeps.
    pub fn fit(&mut self, lambda: f64, options: &EstimationOptions) -> Result<usize> {
        let p = self.p;
        if !self.started {
            self.w.copy_from_slice(&self.s);
            self.beta.iter_mut().for_each(|b| *b = 0.0);
            self.started = true;
        }
        let diag_pen = if options.penalize_diagonal { lambda } else { 0.0 };
        for i in 0..p {
            self.w[i * p + i] = self.s[i * p + i] + diag_pen;
        }
        let inner_tol = (options.convergence_tol * 1e-2).max(1e-12);
        let n_off = (p * (p - 1)) as f64;

        for sweep in 1..=options.max_iter {
            let mut change = 0.0;
            for j in 0..p {
                let (w, s, u) = (&mut self.w, &self.s, &mut self.u);
                let b = &mut self.beta[j * p..(j + 1) * p];

                // u = W11 * beta. beta_j is always zero, so the full product
                // equals the one over the other nodes; skip zero coefficients.
                u.iter_mut().for_each(|v| *v = 0.0);
                for (l, &bl) in b.iter().enumerate() {
                    if bl != 0.0 {
                        for (uk, wk) in u.iter_mut().zip(&w[l * p..(l + 1) * p]) {
                            *uk += bl * wk;
                        }
                    }
                }

                for _ in 0..MAX_INNER_SWEEPS {
                    let mut max_step: f64 = 0.0;
                    for k in 0..p {
                        if k == j {
                            continue;
                        }
                        let wkk = w[k * p + k];
                        let r = s[j * p + k] - (u[k] - wkk * b[k]);
                        let new = soft(r, lambda) / wkk;
                        let d = new - b[k];
                        if d != 0.0 {
                            b[k] = new;
                            for (ul, wl) in u.iter_mut().zip(&w[k * p..(k + 1) * p]) {
                                *ul += d * wl;
                            }
                            max_step = max_step.max(d.abs());
                        }
                    }
                    if max_step < inner_tol {
                        break;
                    }
                }

                // w12 = W11 * beta, which u now holds.
                for k in 0..p {
                    if k == j {
                        continue;
                    }
                    let v = u[k];
                    change += (v - w[j * p + k]).abs();
                    w[j * p + k] = v;
                    w[k * p + j] = v;
                }
            }
            if !change.is_finite() {
                return Err(Error::NonConvergence {
                    what: "graphical lasso (diverged)",
                    iterations: sweep,
                });
            }
            if change / n_off < options.convergence_tol {
                return Ok(sweep);
            }
        }
        Err(Error::NonConvergence {
            what: "graphical lasso",
            iterations: options.max_iter,
        })
    }

    /// Precision matrix from the current solution, symmetrized, column-major.
    pub fn precision_into(&self, k: &mut Vec<f64>) {
        let p = self.p;
        k.clear();
        k.resize(p * p, 0.0);
        for j in 0..p {
            let b = &self.beta[j * p..(j + 1) * p];
            let mut dot = 0.0;
            for l in 0..p {
                if l != j {
                    dot += self.w[j * p + l] * b[l];
                }
            }
            let kjj = 1.0 / (self.w[j * p + j] - dot);
            k[j * p + j] = kjj;
            for l in 0..p {
                if l != j {
                    k[j * p + l] = -b[l] * kjj;
                }
            }
        }
        for j in 0..p {
            for i in 0..j {
                let v = 0.5 * (k[j * p + i] + k[i * p + j]);
                k[j * p + i] = v;
                k[i * p + j] = v;
            }
        }
    }

    pub fn covariance(&self) -> &[f64] {
        &self.w
    }
}

/// Whether a column-major symmetric matrix is positive definite.
pub(crate) fn is_pd(k: &[f64], p: usize, scratch: &mut Vec<f64>) -> bool {
    scratch.clear();
    scratch.extend_from_slice(k);
    cholesky_in_place(scratch, p)
}

fn check_input(s: &DMatrix<f64>, lambda: f64) -> Result<()> {
    let p = s.nrows();
    if s.ncols() != p || p < 2 {
        return Err(Error::InvalidArgument("glasso needs a square matrix with p >= 2".into()));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Maximize `log det K - tr(S K) - lambda * sum_{i != j} |K_ij|` (plus the
/// diagonal when `penalize_diagonal`) from a cold start.
pub fn glasso(s: &DMatrix<f64>, lambda: f64, options: &EstimationOptions) -> Result<GlassoFit> {
    check_input(s, lambda)?;
    options.validate()?;
    let p = s.nrows();
    let mut state = GlassoState::new(s);
    let iterations = state.fit(lambda, options)?;
    let mut k = Vec::new();
    state.precision_into(&mut k);
    let mut scratch = Vec::new();
    if !is_pd(&k, p, &mut scratch) {
        let kk = DMatrix::from_column_slice(p, p, &k);
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(&kk),
        });
    }
    Ok(GlassoFit {
        precision: DMatrix::from_column_slice(p, p, &k),
        covariance: DMatrix::from_column_slice(p, p, state.covariance()),
        iterations,
    })
}

/// The penalized objective maximized by [`glasso`]; `-inf` if `k` is not PD.
pub fn glasso_objective(s: &DMatrix<f64>, k: &DMatrix<f64>, lambda: f64, penalize_diagonal: bool) -> f64 {
    let p = s.nrows();
    let mut scratch = Vec::new();
    let Some(ld) = log_det_pd(k.as_slice(), p, &mut scratch) else {
        return f64::NEG_INFINITY;
    };
    let tr = s.component_mul(k).sum();
    let mut pen = 0.0;
    for j in 0..p {
        for i in 0..p {
            if i != j || penalize_diagonal {
                pen += k[(i, j)].abs();
            }
        }
    }
    ld - tr - lambda * pen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> EstimationOptions {
        EstimationOptions {
            convergence_tol: 1e-9,
            ..Default::default()
        }
    }

    #[test]
    fn large_lambda_gives_diagonal() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.4, -0.2, 0.4, 1.0, 0.3, -0.2, 0.3, 1.0]);
        let fit = glasso(&s, 0.4, &opts()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(fit.precision[(i, j)], 0.0);
                }
            }
            assert!((fit.precision[(i, i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_lambda_approaches_inverse() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.4, -0.2, 0.4, 1.0, 0.3, -0.2, 0.3, 1.0]);
        let fit = glasso(&s, 1e-7, &opts()).unwrap();
        let inv = s.clone().try_inverse().unwrap();
        assert!((fit.precision - inv).abs().max() < 1e-4);
    }

    #[test]
    fn p2_closed_form() {
        // For p = 2 with unit diagonal and unpenalized diagonal, the optimal
        // working covariance is W_12 = soft(S_12, lambda).
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
        let fit = glasso(&s, 0.2, &opts()).unwrap();
        assert!((fit.covariance[(0, 1)] - 0.4).abs() < 1e-10);
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let k = w.try_inverse().unwrap();
        assert!((fit.precision - k).abs().max() < 1e-9);
    }

    #[test]
    fn objective_beats_identity() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.1, 0.5, 1.0, 0.0, 0.1, 0.0, 1.0]);
        for &lam in &[0.01, 0.1, 0.3] {
            let fit = glasso(&s, lam, &opts()).unwrap();
            let id = DMatrix::identity(3, 3);
            assert!(glasso_objective(&s, &fit.precision, lam, false) >= glasso_objective(&s, &id, lam, false));
        }
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let s = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.5, 0.2, 0.1, 0.5, 1.0, 0.3, 0.0, 0.2, 0.3, 1.0, 0.4, 0.1, 0.0, 0.4, 1.0],
        );
        let o = opts();
        let mut state = GlassoState::new(&s);
        let mut k = Vec::new();
        for &lam in &[0.45, 0.3, 0.2, 0.05] {
            state.fit(lam, &o).unwrap();
        }
        state.precision_into(&mut k);
        let cold = glasso(&s, 0.05, &o).unwrap();
        let warm = DMatrix::from_column_slice(4, 4, &k);
        assert!((warm - cold.precision).abs().max() < 1e-6);
    }

    #[test]
    fn rejects_bad_lambda() {
        let s = DMatrix::<f64>::identity(2, 2);
        assert!(glasso(&s, 0.0, &opts()).is_err());
        assert!(glasso(&s, -1.0, &opts()).is_err());
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.7, 0.5, 0.7, 1.0, 0.6, 0.5, 0.6, 1.0]);
        let o = EstimationOptions {
            max_iter: 1,
            convergence_tol: 1e-15,
            ..Default::default()
        };
        assert!(matches!(glasso(&s, 0.01, &o), Err(Error::NonConvergence { .. })));
    }
}
