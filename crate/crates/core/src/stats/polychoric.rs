//! Two-step polychoric correlation: thresholds from the marginal proportions,
//! then a one-dimensional maximum-likelihood search for the latent correlation.

use serde::Serialize;

use super::bvn::{phi_inv, BvnKernel};
use super::optimize::brent_minimize;
use crate::{Error, Result};

/// Search interval is `[-RHO_BOUND, RHO_BOUND]`.
pub const RHO_BOUND: f64 = 1.0 - 1e-6;
const RHO_TOL: f64 = 1e-6;
const MAX_ITER: usize = 500;
/// Estimates this close to the bound are reported as degenerate.
const DEGENERATE_MARGIN: f64 = 1e-5;

/// Cross-tabulated counts of two ordinal variables, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || counts.iter().any(|r| r.len() != cols) {
            return Err(Error::DegenerateTable("table must be a non-empty rectangle".into()));
        }
        Ok(ContingencyTable {
            rows,
            cols,
            counts: counts.into_iter().flatten().collect(),
        })
    }

    /// Tabulate two code vectors; codes `>= levels` mark missing cells and are skipped.
    pub fn from_codes(x: &[u8], y: &[u8], x_levels: usize, y_levels: usize) -> Self {
        let mut counts = vec![0u64; x_levels * y_levels];
        for (&a, &b) in x.iter().zip(y) {
            if (a as usize) < x_levels && (b as usize) < y_levels {
                counts[a as usize * y_levels + b as usize] += 1;
            }
        }
        ContingencyTable {
            rows: x_levels,
            cols: y_levels,
            counts,
        }
    }

    /// Row-major counts, unchecked; used by callers that tabulate themselves.
    pub(crate) fn from_flat(rows: usize, cols: usize, counts: Vec<u64>) -> Self {
        debug_assert_eq!(counts.len(), rows * cols);
        ContingencyTable { rows, cols, counts }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Drop empty rows and columns. An empty level carries no cases, so dropping
    /// it is the same as merging it into its neighbour.
    pub fn collapse_empty(&self) -> ContingencyTable {
        let keep_r: Vec<usize> = self
            .row_sums()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(i, _)| i)
            .collect();
        let keep_c: Vec<usize> = self
            .col_sums()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(j, _)| j)
            .collect();
        let counts = keep_r
            .iter()
            .flat_map(|&i| keep_c.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        ContingencyTable {
            rows: keep_r.len(),
            cols: keep_c.len(),
            counts,
        }
    }
}

/// Thresholds on the latent standard-normal scale: `Phi^-1` of the cumulative
/// proportions through each level but the last. Empty levels are collapsed
/// into their neighbour first, so the result has (occupied levels - 1) entries.
pub fn polychoric_thresholds(level_counts: &[u64]) -> Result<Vec<f64>> {
    let occupied: Vec<u64> = level_counts.iter().copied().filter(|&c| c > 0).collect();
    if occupied.len() < 2 {
        return Err(Error::DegenerateTable(format!(
            "{} occupied level(s), need at least 2",
            occupied.len()
        )));
    }
    let total: u64 = occupied.iter().sum();
    let mut cum = 0u64;
    Ok(occupied[..occupied.len() - 1]
        .iter()
        .map(|&c| {
            cum += c;
            phi_inv(cum as f64 / total as f64)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolychoricEstimate {
    pub rho: f64,
    /// The likelihood is maximized at (numerically) the search bound,
    /// e.g. for a perfectly concordant table.
    pub degenerate: bool,
    pub log_likelihood: f64,
    pub iterations: usize,
}

fn check_thresholds(thr: &[f64]) -> Result<()> {
    if thr.iter().any(|t| !t.is_finite()) || thr.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "thresholds must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Log-likelihood of the table at latent correlation `rho`, given thresholds.
/// `grid` is scratch space of size (rows + 1) * (cols + 1).
fn log_likelihood(
    table: &ContingencyTable,
    ax: &[f64],
    ay: &[f64],
    rho: f64,
    grid: &mut [f64],
) -> f64 {
    let (kx, ky) = (ax.len(), ay.len());
    let kernel = BvnKernel::new(rho);
    for i in 0..kx {
        for j in 0..ky {
            grid[i * ky + j] = kernel.cdf(ax[i], ay[j]);
        }
    }
    let mut ll = 0.0;
    for i in 0..table.rows {
        for j in 0..table.cols {
            let n = table.get(i, j);
            if n == 0 {
                continue;
            }
            let p = grid[(i + 1) * ky + j + 1] - grid[i * ky + j + 1] - grid[(i + 1) * ky + j]
                + grid[i * ky + j];
            ll += n as f64 * p.max(1e-300).ln();
        }
    }
    ll
}

/// Maximum-likelihood latent correlation for a table with fixed thresholds.
pub fn polychoric_rho(
    table: &ContingencyTable,
    thr_x: &[f64],
    thr_y: &[f64],
) -> Result<PolychoricEstimate> {
    if thr_x.len() + 1 != table.rows || thr_y.len() + 1 != table.cols {
        return Err(Error::InvalidArgument(format!(
            "table is {}x{} but thresholds imply {}x{}",
            table.rows,
            table.cols,
            thr_x.len() + 1,
            thr_y.len() + 1
        )));
    }
    check_thresholds(thr_x)?;
    check_thresholds(thr_y)?;
    let occupied = |s: Vec<u64>| s.iter().filter(|&&c| c > 0).count();
    if occupied(table.row_sums()) < 2 || occupied(table.col_sums()) < 2 {
        return Err(Error::DegenerateTable(
            "need at least two occupied rows and columns".into(),
        ));
    }

    let bounded = |thr: &[f64]| {
        let mut v = Vec::with_capacity(thr.len() + 2);
        v.push(f64::NEG_INFINITY);
        v.extend_from_slice(thr);
        v.push(f64::INFINITY);
        v
    };
    let (ax, ay) = (bounded(thr_x), bounded(thr_y));
    let mut grid = vec![0.0; ax.len() * ay.len()];

    let min = brent_minimize(
        |rho| -log_likelihood(table, &ax, &ay, rho, &mut grid),
        -RHO_BOUND,
        RHO_BOUND,
        RHO_TOL,
        MAX_ITER,
    )?;
    Ok(PolychoricEstimate {
        rho: min.x,
        degenerate: RHO_BOUND - min.x.abs() < DEGENERATE_MARGIN,
        log_likelihood: -min.fx,
        iterations: min.iterations,
    })
}

/// Collapse empty levels, estimate thresholds from the margins, then fit rho.
pub fn polychoric(table: &ContingencyTable) -> Result<PolychoricEstimate> {
    let t = table.collapse_empty();
    let thr_x = polychoric_thresholds(&t.row_sums())?;
    let thr_y = polychoric_thresholds(&t.col_sums())?;
    polychoric_rho(&t, &thr_x, &thr_y)
}
