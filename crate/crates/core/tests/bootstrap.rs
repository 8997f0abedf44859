use std::sync::OnceLock;

use proptest::prelude::*;
use psynet::bootstrap::{
    case_dropping_boot, cs_coefficient, difference_test, edge_ci, node_dropping_boot, nonparametric_boot,
    parametric_boot, percentile_interval, Element, StabilityIndex, Statistic,
};
use psynet::io::{load_bootstrap, save_bootstrap, write_edge_ci_csv, write_subset_csv};
use psynet::simgen::{chain_network, ordinalize, pcor_to_covariance, sample_mvn};
use psynet::{BootstrapResult, Dataset, EstimationOptions, SubsetBootstrapResult};

fn ring_data(n: usize, seed: u64) -> Dataset {
    let net = chain_network(6, 0.3, 0.5, seed).unwrap();
    let x = sample_mvn(&pcor_to_covariance(&net).unwrap(), n, seed).unwrap();
    ordinalize(&x, 4, seed).unwrap()
}

fn boot() -> &'static BootstrapResult {
    static B: OnceLock<BootstrapResult> = OnceLock::new();
    B.get_or_init(|| nonparametric_boot(&ring_data(300, 5), &EstimationOptions::default(), 200, 9, 0).unwrap())
}

fn subsets() -> &'static SubsetBootstrapResult {
    static S: OnceLock<SubsetBootstrapResult> = OnceLock::new();
    S.get_or_init(|| {
        let levels = [0.1, 0.3, 0.5, 0.7];
        case_dropping_boot(&ring_data(300, 6), &EstimationOptions::default(), &levels, 120, 4, 0).unwrap()
    })
}

fn element(statistic: Statistic, a: usize, b: usize) -> Element {
    match statistic {
        Statistic::Edge => Element::edge(a, b),
        _ => Element::Node(a),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn difference_test_is_antisymmetric(
        a in 0usize..6, b in 0usize..6, c in 0usize..6, d in 0usize..6,
        stat in prop::sample::select(vec![Statistic::Edge, Statistic::Strength, Statistic::Closeness, Statistic::Betweenness]),
        alpha in prop::sample::select(vec![0.01, 0.05, 0.1, 0.2]),
    ) {
        prop_assume!(stat != Statistic::Edge || (a != b && c != d));
        let (x, y) = if stat == Statistic::Edge {
            (element(stat, a, b), element(stat, c, d))
        } else {
            (Element::Node(a), Element::Node(c))
        };
        let ab = difference_test(boot(), x, y, stat, alpha).unwrap();
        let ba = difference_test(boot(), y, x, stat, alpha).unwrap();
        prop_assert_eq!(ab.ci_lower, -ba.ci_upper);
        prop_assert_eq!(ab.ci_upper, -ba.ci_lower);
        prop_assert_eq!(ab.significant, ba.significant);
    }

    #[test]
    fn edge_intervals_widen_as_alpha_shrinks(a1 in 0.01f64..0.5, a2 in 0.01f64..0.5) {
        let (small, large) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let wide = edge_ci(boot(), small).unwrap();
        let narrow = edge_ci(boot(), large).unwrap();
        for (w, n) in wide.iter().zip(&narrow) {
            prop_assert!(w.lower <= n.lower && n.upper <= w.upper);
            prop_assert!(w.lower <= w.upper);
        }
    }

    #[test]
    fn cs_is_nonincreasing_in_threshold_and_probability(
        t1 in 0.0f64..1.0, t2 in 0.0f64..1.0, q1 in 0.5f64..1.0, q2 in 0.5f64..1.0,
        index in prop::sample::select(StabilityIndex::ALL.to_vec()),
    ) {
        let (tl, th) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (ql, qh) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let s = subsets();
        let base = cs_coefficient(s, index, tl, ql).value;
        prop_assert!(cs_coefficient(s, index, th, ql).value <= base);
        prop_assert!(cs_coefficient(s, index, tl, qh).value <= base);
        prop_assert!(base == 0.0 || s.drop_levels.contains(&base));
    }

    #[test]
    fn percentile_interval_is_affine_equivariant(
        values in prop::collection::vec(-10.0f64..10.0, 5..200),
        alpha in 0.01f64..0.5, shift in -5.0f64..5.0, scale in 0.1f64..10.0,
    ) {
        let (lo, hi) = percentile_interval(&values, alpha).unwrap();
        let moved: Vec<f64> = values.iter().map(|v| shift + scale * v).collect();
        let (mlo, mhi) = percentile_interval(&moved, alpha).unwrap();
        let tol = 1e-9 * (1.0 + shift.abs() + scale * 10.0);
        prop_assert!((mlo - (shift + scale * lo)).abs() < tol);
        prop_assert!((mhi - (shift + scale * hi)).abs() < tol);
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>)) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf);
    buf
}

#[test]
fn worker_count_does_not_change_results() {
    let data = ring_data(200, 1);
    let opts = EstimationOptions::default();
    let one = nonparametric_boot(&data, &opts, 60, 3, 1).unwrap();
    let many = nonparametric_boot(&data, &opts, 60, 3, 4).unwrap();
    assert_eq!(one.replicates, many.replicates);
    let ci = |b: &BootstrapResult| csv_bytes(|w| write_edge_ci_csv(w, b.labels(), &edge_ci(b, 0.05).unwrap()).unwrap());
    assert_eq!(ci(&one), ci(&many));

    let levels = [0.2, 0.5];
    let s1 = node_dropping_boot(&data, &opts, &levels, 40, 3, 1).unwrap();
    let s4 = node_dropping_boot(&data, &opts, &levels, 40, 3, 3).unwrap();
    assert_eq!(s1, s4);
    let sub = |s: &SubsetBootstrapResult| csv_bytes(|w| write_subset_csv(w, s).unwrap());
    assert_eq!(sub(&s1), sub(&s4));

    let net = one.reference.clone();
    let p1 = parametric_boot(&net, 200, &opts, 40, 8, 1).unwrap();
    let p4 = parametric_boot(&net, 200, &opts, 40, 8, 4).unwrap();
    assert_eq!(p1.replicates, p4.replicates);
    assert!(p1.shrinkage_warning);
}

#[test]
fn saved_bootstrap_reloads_to_the_same_inference() {
    let dir = tempfile::tempdir().unwrap();
    let b = boot();
    save_bootstrap(dir.path(), b).unwrap();
    let back = load_bootstrap(dir.path()).unwrap();
    assert_eq!(back.n_boots, b.n_boots);
    assert_eq!(back.base_seed, b.base_seed);
    assert_eq!(back.replicates, b.replicates);
    assert_eq!(back.reference.weights(), b.reference.weights());
    assert_eq!(edge_ci(&back, 0.05).unwrap(), edge_ci(b, 0.05).unwrap());
    let t = |r: &BootstrapResult| difference_test(r, Element::Node(0), Element::Node(3), Statistic::Strength, 0.05).unwrap();
    assert_eq!(t(&back), t(b));
}

#[test]
fn alpha_at_the_floor_uses_the_extremes() {
    let b = boot();
    let cis = edge_ci(b, 2.0 / b.n_boots as f64).unwrap();
    for ci in &cis {
        let vals: Vec<f64> = b.successes().map(|r| r.weights[(ci.i, ci.j)]).collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((ci.lower, ci.upper), (min, max));
    }
}
