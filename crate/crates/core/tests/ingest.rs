use nalgebra::DMatrix;
use proptest::prelude::*;
use psynet::ingest::{apply_missing_policy, detect_variable_types, load_table, write_table, LoadOptions};
use psynet::{Dataset, MissingPolicy};

/// `n x p` table mixing small-integer and continuous columns with some holes.
fn table() -> impl Strategy<Value = DMatrix<f64>> {
    (4usize..30, 2usize..6).prop_flat_map(|(n, p)| {
        prop::collection::vec((0u8..5, -3.0f64..3.0, 0u8..10), n * p).prop_map(move |cells| {
            DMatrix::from_fn(n, p, |i, j| {
                let (code, x, hole) = cells[j * n + i];
                if hole == 0 && i > 1 {
                    f64::NAN
                } else if j % 2 == 0 {
                    f64::from(code)
                } else {
                    x
                }
            })
        })
    })
}

proptest! {
    #[test]
    fn type_detection_is_idempotent(m in table()) {
        if let Ok(ds) = Dataset::from_matrix(m) {
            let once = detect_variable_types(&ds);
            let again = ds.clone().with_types(once.clone()).unwrap();
            prop_assert_eq!(detect_variable_types(&again), once.clone());
            prop_assert_eq!(detect_variable_types(&ds), once);
        }
    }

    #[test]
    fn write_then_load_round_trips(m in table()) {
        let Ok(ds) = Dataset::from_matrix(m) else { return Ok(()) };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_table(&ds, std::fs::File::create(&path).unwrap()).unwrap();
        let back = load_table(&path, &LoadOptions::default()).unwrap();
        prop_assert_eq!(back.names(), ds.names());
        prop_assert_eq!(back.variable_types(), ds.variable_types());
        for (a, b) in back.values().iter().zip(ds.values().iter()) {
            prop_assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn policies_keep_their_dimension(m in table()) {
        let Ok(ds) = Dataset::from_matrix(m) else { return Ok(()) };
        let pairwise = apply_missing_policy(&ds, MissingPolicy::Pairwise).unwrap();
        prop_assert_eq!(pairwise.n(), ds.n());
        if let Ok(listwise) = apply_missing_policy(&ds, MissingPolicy::Listwise) {
            prop_assert_eq!(listwise.p(), ds.p());
            prop_assert!(!listwise.has_missing());
        }
    }
}
