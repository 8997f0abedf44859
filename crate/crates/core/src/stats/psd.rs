//! Positive-semidefinite repair for correlation matrices.

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalues below this are treated as violating positive semidefiniteness.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Floor applied to eigenvalues during repair.
pub const EIGEN_FLOOR: f64 = 1e-8;

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Nearest PSD matrix in the eigenvalue-clipping sense, rescaled to a unit
/// diagonal. Matrices that are already PSD (smallest eigenvalue at least
/// `-PSD_TOLERANCE`) come back unchanged. The flag reports whether a repair happened.
pub fn nearest_psd(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    if m.clone().cholesky().is_some() {
        return (m.clone(), false);
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= -PSD_TOLERANCE {
        return (m.clone(), false);
    }
    let clipped = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    let p = m.nrows();
    let d: Vec<f64> = (0..p).map(|i| rebuilt[(i, i)].sqrt()).collect();
    let mut out = DMatrix::from_fn(p, p, |i, j| rebuilt[(i, j)] / (d[i] * d[j]));
    for i in 0..p {
        out[(i, i)] = 1.0;
        for j in 0..i {
            let s = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    (out, true)
}
