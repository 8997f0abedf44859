mod common;

use proptest::prelude::*;
use psynet::stats::polychoric::ContingencyTable;
use psynet::stats::{bvn_rect_prob, nearest_psd, pearson, polychoric, quantile_type6, spearman};

fn table(rho: f64, tx: &[f64], ty: &[f64], n: f64) -> ContingencyTable {
    let edges = |t: &[f64]| {
        let mut v = vec![f64::NEG_INFINITY];
        v.extend_from_slice(t);
        v.push(f64::INFINITY);
        v
    };
    let (ex, ey) = (edges(tx), edges(ty));
    let counts = (0..ex.len() - 1)
        .map(|i| {
            (0..ey.len() - 1)
                .map(|j| (n * bvn_rect_prob(rho, ex[i], ex[i + 1], ey[j], ey[j + 1]).unwrap()).round() as u64)
                .collect()
        })
        .collect();
    ContingencyTable::new(counts).unwrap()
}

fn transpose(t: &ContingencyTable) -> ContingencyTable {
    let (r, c) = t.shape();
    ContingencyTable::new((0..c).map(|j| (0..r).map(|i| t.get(i, j)).collect()).collect()).unwrap()
}

proptest! {
    #[test]
    fn correlations_are_symmetric(xy in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..60)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn polychoric_is_symmetric(rho in -0.9f64..0.9, t in -1.0f64..1.0) {
        let tab = table(rho, &[t - 0.6, t, t + 0.7], &[-0.4, 0.5], 5000.0);
        let a = polychoric(&tab).unwrap().rho;
        let b = polychoric(&transpose(&tab)).unwrap().rho;
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn polychoric_recovers_generating_rho(rho in -0.8f64..0.8) {
        let tab = table(rho, &[-0.8, 0.1, 0.9], &[-1.1, -0.2, 0.6], 1e6);
        prop_assert!((polychoric(&tab).unwrap().rho - rho).abs() < 0.01);
    }

    #[test]
    fn quantile_is_monotone_and_affine_equivariant(
        v in prop::collection::vec(-100.0f64..100.0, 1..80),
        p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, shift in -50.0f64..50.0, scale in 0.01f64..20.0,
    ) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(quantile_type6(&v, lo).unwrap() <= quantile_type6(&v, hi).unwrap());
        let moved: Vec<f64> = v.iter().map(|x| shift + scale * x).collect();
        let expect = shift + scale * quantile_type6(&v, p1).unwrap();
        prop_assert!((quantile_type6(&moved, p1).unwrap() - expect).abs() < 1e-9 * (1.0 + expect.abs()));
    }

    #[test]
    fn nearest_psd_is_idempotent(seed in any::<u64>(), p in 2usize..7, bump in 0.0f64..0.8) {
        let mut m = common::random_correlation(p, p + 3, &mut common::rng(seed));
        // Push one pair past what the others allow.
        m[(0, 1)] = (m[(0, 1)] + bump).clamp(-0.99, 0.99);
        m[(1, 0)] = m[(0, 1)];
        let (once, _) = nearest_psd(&m);
        let (twice, repaired) = nearest_psd(&once);
        prop_assert!(!repaired);
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn pearson_matches_textbook_formula() {
    let x = [1.0, 2.0, 4.0, 7.0, 11.0];
    let y = [2.0, 1.0, 5.0, 6.0, 13.0];
    let (mx, my) = (x.iter().sum::<f64>() / 5.0, y.iter().sum::<f64>() / 5.0);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let expect = sxy / (sxx * syy).sqrt();
    assert!((pearson(&x, &y).unwrap() - expect).abs() < 1e-14);
}
