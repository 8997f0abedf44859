//! Hyndman-Fan type-6 sample quantiles.

use crate::{Error, Result};

/// Type-6 quantile of `samples` at probability `prob`.
///
/// With sorted `x(1..n)` and `h = prob * (n + 1)` clamped to `[1, n]`, returns
/// `x(floor h) + (h - floor h) * (x(floor h + 1) - x(floor h))`.
pub fn quantile_type6(samples: &[f64], prob: f64) -> Result<f64> {
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in quantile input".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_type6_sorted(&sorted, prob)
}

/// As [`quantile_type6`] for input already sorted ascending.
pub fn quantile_type6_sorted(sorted: &[f64], prob: f64) -> Result<f64> {
    let n = sorted.len();
    if n == 0 {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidArgument(format!("probability {prob} outside [0, 1]")));
    }
    let h = (prob * (n as f64 + 1.0)).clamp(1.0, n as f64);
    let lo = h.floor();
    let idx = lo as usize - 1;
    if idx + 1 >= n {
        return Ok(sorted[n - 1]);
    }
    let frac = h - lo;
    Ok(sorted[idx] + frac * (sorted[idx + 1] - sorted[idx]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let x = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile_type6(&x, 0.5).unwrap(), 2.5);
        assert_eq!(quantile_type6(&x, 0.25).unwrap(), 1.25);
        assert_eq!(quantile_type6(&x, 0.0).unwrap(), 1.0);
        assert_eq!(quantile_type6(&x, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn errors() {
        assert!(quantile_type6(&[], 0.5).is_err());
        assert!(quantile_type6(&[1.0], 1.5).is_err());
        assert!(quantile_type6(&[1.0], -0.1).is_err());
        assert!(quantile_type6(&[1.0, f64::NAN], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_prob(mut xs in prop::collection::vec(-1e3f64..1e3, 1..60), p1 in 0.0f64..1.0, p2 in 0.0f64..1.0) {
            xs.sort_by(f64::total_cmp);
            let (a, b) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(quantile_type6_sorted(&xs, a).unwrap() <= quantile_type6_sorted(&xs, b).unwrap() + 1e-9);
        }

        #[test]
        fn affine_equivariant(xs in prop::collection::vec(-1e3f64..1e3, 1..60), p in 0.0f64..1.0, scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
            let q = quantile_type6(&xs, p).unwrap();
            let ys: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let qy = quantile_type6(&ys, p).unwrap();
            prop_assert!((qy - (scale * q + shift)).abs() <= 1e-8 * (1.0 + qy.abs()));
        }
    }
}
