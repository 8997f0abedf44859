//! Small dense helpers on column-major slices, used in the inner loops where
//! allocating nalgebra matrices per call would dominate the cost.

/// In-place Cholesky of a symmetric `p x p` matrix (lower triangle used).
/// Returns `false` if a pivot is not strictly positive.
pub(crate) fn cholesky_in_place(a: &mut [f64], p: usize) -> bool {
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            let l = a[k * p + j];
            d -= l * l;
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in (j + 1)..p {
            let mut s = a[j * p + i];
            for k in 0..j {
                s -= a[k * p + i] * a[k * p + j];
            }
            a[j * p + i] = s / d;
        }
    }
    true
}

/// log det of a symmetric positive-definite matrix, `None` if not PD.
pub(crate) fn log_det_pd(a: &[f64], p: usize, scratch: &mut Vec<f64>) -> Option<f64> {
    scratch.clear();
    scratch.extend_from_slice(a);
    if !cholesky_in_place(scratch, p) {
        return None;
    }
    Some(2.0 * (0..p).map(|j| scratch[j * p + j].ln()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_matches_hand_value() {
        // [[4, 2], [2, 3]] has det 8
        let a = [4.0, 2.0, 2.0, 3.0];
        let mut s = Vec::new();
        let ld = log_det_pd(&a, 2, &mut s).unwrap();
        assert!((ld - 8f64.ln()).abs() < 1e-14);
        assert!(log_det_pd(&[1.0, 2.0, 2.0, 1.0], 2, &mut s).is_none());
    }
}
