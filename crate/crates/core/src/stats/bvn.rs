//! Standard bivariate normal probabilities.
//!
//! The upper-orthant routine follows Genz's BVND (Drezner & Wesolowsky with
//! Gauss-Legendre quadrature and a separate expansion for |r| > 0.925),
//! accurate to roughly 1e-15.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

// (weight, abscissa) on [-1, 0]; the rule is applied at 1 +/- x.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705e+00, -0.9324695142031522e+00),
    (0.3607615730481384e+00, -0.6612093864662647e+00),
    (0.4679139345726904e+00, -0.2386191860831970e+00),
];

const GL12: [(f64, f64); 6] = [
    (0.4717533638651177e-01, -0.9815606342467191e+00),
    (0.1069393259953183e+00, -0.9041172563704750e+00),
    (0.1600783285433464e+00, -0.7699026741943050e+00),
    (0.2031674267230659e+00, -0.5873179542866171e+00),
    (0.2334925365383547e+00, -0.3678314989981802e+00),
    (0.2491470458134029e+00, -0.1252334085114692e+00),
];

const GL20: [(f64, f64); 10] = [
    (0.1761400713915212e-01, -0.9931285991850949e+00),
    (0.4060142980038694e-01, -0.9639719272779138e+00),
    (0.6267204833410906e-01, -0.9122344282513259e+00),
    (0.8327674157670475e-01, -0.8391169718222188e+00),
    (0.1019301198172404e+00, -0.7463319064601508e+00),
    (0.1181945319615184e+00, -0.6360536807265150e+00),
    (0.1316886384491766e+00, -0.5108670019508271e+00),
    (0.1420961093183821e+00, -0.3737060887154196e+00),
    (0.1491729864726037e+00, -0.2277858511416451e+00),
    (0.1527533871307259e+00, -0.7652652113349733e-01),
];

/// Standard normal CDF.
#[inline]
pub fn phi(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn phi_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_TWO_PI
}

/// Standard normal quantile.
pub fn phi_inv(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // Exact symmetry around the median keeps balanced splits at exactly 0.
    if p == 0.5 {
        return 0.0;
    }
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// P(X > h, Y > k) for standard normals with correlation `r`, |r| <= 1.
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    BvnKernel::new(r).upper(h, k)
}

/// The parts of the BVND computation that depend on `r` only. Building one
/// kernel and evaluating it at many `(h, k)` saves the trigonometry when a
/// whole grid of probabilities is needed at a single correlation.
pub(crate) struct BvnKernel {
    r: f64,
    len: usize,
    /// Low |r|: (weight, sin, 1 / (1 - sin^2)) per node.
    /// High |r|: (weight, xs, rs) per node.
    nodes: [(f64, f64, f64); 20],
    /// Low |r|: asin(r) / 4pi. High |r|: sqrt(1 - r^2).
    scale: f64,
}

impl BvnKernel {
    pub(crate) fn new(r: f64) -> Self {
        let quad: &[(f64, f64)] = if r.abs() < 0.3 {
            &GL6
        } else if r.abs() < 0.75 {
            &GL12
        } else {
            &GL20
        };
        let mut nodes = [(0.0, 0.0, 0.0); 20];
        let mut len = 0;
        let scale;
        if r.abs() < 0.925 {
            let asr = r.asin();
            for &(w, x) in quad {
                for sign in [-1.0, 1.0] {
                    let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                    nodes[len] = (w, sn, 1.0 / (1.0 - sn * sn));
                    len += 1;
                }
            }
            scale = asr / (2.0 * TWO_PI);
        } else {
            let a = ((1.0 - r) * (1.0 + r)).sqrt();
            let half = a / 2.0;
            for &(w, x) in quad {
                for sign in [-1.0, 1.0] {
                    let xs = (half * (sign * x + 1.0)).powi(2);
                    nodes[len] = (w, xs, (1.0 - xs).sqrt());
                    len += 1;
                }
            }
            scale = a;
        }
        BvnKernel { r, len, nodes, scale }
    }

    pub(crate) fn upper(&self, h: f64, k: f64) -> f64 {
        let r = self.r;
        let nodes = &self.nodes[..self.len];
        let mut hk = h * k;
        let mut bvn = 0.0;

        if r.abs() < 0.925 {
            if r != 0.0 {
                let hs = (h * h + k * k) / 2.0;
                for &(w, sn, inv) in nodes {
                    bvn += w * ((sn * hk - hs) * inv).exp();
                }
                bvn *= self.scale;
            }
            return bvn + phi(-h) * phi(-k);
        }

        let mut k = k;
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let a = self.scale;
            let b_s = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(b_s / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
            }
            if hk > -100.0 {
                let b = b_s.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * SQRT_TWO_PI
                    * phi(-b / a)
                    * b
                    * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
            }
            let half = a / 2.0;
            for &(w, xs, rs) in nodes {
                let asr = -(b_s / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += half
                        * w
                        * asr.exp()
                        * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
            bvn = -bvn / TWO_PI;
        }
        if r > 0.0 {
            bvn + phi(-h.max(k))
        } else {
            let mut out = -bvn;
            if k > h {
                out += if h < 0.0 {
                    phi(k) - phi(h)
                } else {
                    phi(-h) - phi(-k)
                };
            }
            out
        }
    }

    /// Lower CDF, as [`bvn_cdf`].
    pub(crate) fn cdf(&self, x: f64, y: f64) -> f64 {
        if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
            return 0.0;
        }
        match (x == f64::INFINITY, y == f64::INFINITY) {
            (true, true) => 1.0,
            (true, false) => phi(y),
            (false, true) => phi(x),
            (false, false) => self.upper(-x, -y).clamp(0.0, 1.0),
        }
    }
}

/// Lower CDF P(X < x, Y < y); infinite limits allowed.
pub fn bvn_cdf(x: f64, y: f64, rho: f64) -> f64 {
    BvnKernel::new(rho).cdf(x, y)
}

/// Probability that a standard bivariate normal with correlation `rho` falls
/// in `(x_lo, x_hi] x (y_lo, y_hi]`.
pub fn bvn_rect_prob(rho: f64, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    if !(x_lo < x_hi) || !(y_lo < y_hi) {
        return Err(Error::InvalidArgument(format!(
            "empty rectangle ({x_lo}, {x_hi}] x ({y_lo}, {y_hi}]"
        )));
    }
    let p = bvn_cdf(x_hi, y_hi, rho) - bvn_cdf(x_lo, y_hi, rho) - bvn_cdf(x_hi, y_lo, rho)
        + bvn_cdf(x_lo, y_lo, rho);
    Ok(p.clamp(0.0, 1.0))
}

/// d/drho of P(X < x, Y < y): the bivariate normal density at (x, y).
#[cfg(test)]
pub(crate) fn bvn_density(x: f64, y: f64, rho: f64) -> f64 {
    if !x.is_finite() || !y.is_finite() {
        return 0.0;
    }
    let one_m = 1.0 - rho * rho;
    let q = (x * x - 2.0 * rho * x * y + y * y) / one_m;
    (-0.5 * q).exp() / (TWO_PI * one_m.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: Plackett's identity
    /// Phi2(x, y; rho) = Phi(x) Phi(y) + int_0^rho phi2(x, y; r) dr,
    /// integrated with composite Gauss-Legendre on many panels after the
    /// substitution r = sin(t), which removes the endpoint singularity.
    fn plackett_oracle(x: f64, y: f64, rho: f64) -> f64 {
        let t_end = rho.asin();
        let panels = 4000;
        let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        let weights = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let h = t_end / panels as f64;
        let mut acc = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (z, w) in nodes.iter().zip(weights) {
                let t = mid + z * h / 2.0;
                let r = t.sin();
                acc += w * h / 2.0 * bvn_density(x, y, r) * t.cos();
            }
        }
        phi(x) * phi(y) + acc
    }

    #[test]
    fn total_mass_and_quadrant() {
        let inf = f64::INFINITY;
        assert!((bvn_rect_prob(0.0, -inf, inf, -inf, inf).unwrap() - 1.0).abs() < 1e-15);
        assert!((bvn_rect_prob(0.0, 0.0, inf, 0.0, inf).unwrap() - 0.25).abs() < 1e-15);
        let expected = 0.25 + 0.5f64.asin() / (2.0 * PI);
        assert!((bvn_rect_prob(0.5, 0.0, inf, 0.0, inf).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_quadrature_oracle() {
        let pts = [-2.5, -1.1, -0.3, 0.0, 0.4, 1.3, 2.7];
        let rhos = [-0.999, -0.95, -0.93, -0.8, -0.5, -0.2, 0.1, 0.35, 0.6, 0.9, 0.926, 0.97, 0.999];
        for &x in &pts {
            for &y in &pts {
                for &r in &rhos {
                    let got = bvn_cdf(x, y, r);
                    let want = plackett_oracle(x, y, r);
                    assert!(
                        (got - want).abs() < 1e-9,
                        "x={x} y={y} r={r}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_in_arguments() {
        for &(x, y, r) in &[(0.3, -1.2, 0.4), (1.5, 0.2, -0.96), (-0.7, 2.0, 0.97)] {
            assert!((bvn_cdf(x, y, r) - bvn_cdf(y, x, r)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bvn_rect_prob(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(bvn_rect_prob(0.2, 1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn quantile_round_trip() {
        for &p in &[1e-6, 0.025, 0.25, 0.5, 0.9, 0.999] {
            assert!((phi(phi_inv(p)) - p).abs() < 1e-13 * p.max(1e-3) * 1e3);
        }
        assert_eq!(phi_inv(0.5), 0.0);
    }
}
