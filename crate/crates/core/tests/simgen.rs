use proptest::prelude::*;
use psynet::ggm::precision_to_pcor;
use psynet::io::write_simulation_csv;
use psynet::simgen::{
    chain_network, ordinalize, pcor_to_covariance, rewire, run_study, sample_mvn, SimulationConfig, Study,
};
use psynet::EstimationOptions;

fn sorted_weights(w: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut v: Vec<f64> = w.iter().map(|e| e.2).collect();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewiring_keeps_edges_and_weights(seed in any::<u64>(), p in 4usize..15, prob in 0.0f64..=1.0) {
        let net = chain_network(p, 0.2, 0.5, seed).unwrap();
        let r = rewire(&net, prob, seed ^ 0xabc).unwrap();
        prop_assert_eq!(r.edge_count(), net.edge_count());
        prop_assert_eq!(sorted_weights(&r.edges()), sorted_weights(&net.edges()));
    }

    #[test]
    fn covariance_inverts_partial_correlations(seed in any::<u64>(), p in 3usize..12, w in 0.05f64..0.45) {
        let net = chain_network(p, w, 0.5, seed).unwrap();
        let cov = pcor_to_covariance(&net).unwrap();
        let back = precision_to_pcor(&cov.clone().try_inverse().unwrap()).unwrap();
        prop_assert!((&back - net.weights()).amax() < 1e-10);
        for i in 0..p {
            prop_assert!((cov[(i, i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ordinalizing_preserves_rank_order(seed in any::<u64>(), levels in 2usize..6) {
        let net = chain_network(5, 0.3, 0.0, seed).unwrap();
        let x = sample_mvn(&pcor_to_covariance(&net).unwrap(), 200, seed).unwrap();
        let ds = ordinalize(&x, levels, seed).unwrap();
        for j in 0..5 {
            let col = ds.column(j);
            for a in 0..200 {
                for b in 0..200 {
                    if x[(a, j)] < x[(b, j)] {
                        prop_assert!(col[a] <= col[b]);
                    }
                }
            }
        }
    }
}

#[test]
fn studies_are_deterministic_and_worker_independent() {
    let config = SimulationConfig {
        p: 5,
        rewiring: vec![0.0, 0.5],
        sample_sizes: vec![150],
        replications: 3,
        n_boots: 40,
        alphas: vec![0.05],
        estimation: EstimationOptions::default(),
        base_seed: 21,
        ..SimulationConfig::default()
    };
    for study in [Study::EdgeDiff, Study::CentralityDiff] {
        let a = run_study(&config, study, 1).unwrap();
        let b = run_study(&config, study, 3).unwrap();
        assert_eq!(a, b);
        let csv = |r| {
            let mut buf = Vec::new();
            write_simulation_csv(&mut buf, r).unwrap();
            buf
        };
        assert_eq!(csv(&a), csv(&b));
        assert_eq!(a.n_jobs, 6);
        for s in &a.summaries {
            if s.metric.ends_with("rejection_rate") {
                assert!((0.0..=1.0).contains(&s.mean));
            }
        }
    }
    let other = run_study(&SimulationConfig { base_seed: 22, ..config.clone() }, Study::CentralityDiff, 1).unwrap();
    assert_ne!(other.records, run_study(&config, Study::CentralityDiff, 1).unwrap().records);
}
