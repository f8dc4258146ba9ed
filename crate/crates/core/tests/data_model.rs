mod common;

use dea::data::{displace_to_positive, load_catalog, load_dataset, Dataset, LoadOptions, VariableSpec};
use dea::efficiency::{solve_all, DeaModelConfig};
use dea::fixture::{fixture_catalog, generate_fixture, market_schema, CATALOG_SIZE};
use proptest::prelude::*;

fn schema(m: usize, s: usize) -> Vec<VariableSpec> {
    let mut v: Vec<VariableSpec> = (0..m).map(|i| VariableSpec::input(format!("in{i}"))).collect();
    v.extend((0..s).map(|r| VariableSpec::output(format!("out{r}"))));
    v
}

fn any_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..8, 1usize..3, 1usize..3).prop_flat_map(|(n, m, s)| {
        prop::collection::vec(prop::collection::vec(-1e6f64..1e6, m + s), n).prop_map(move |values| {
            let ids = (0..n).map(|j| format!("dmu-{j}")).collect();
            Dataset::new(ids, schema(m, s), values).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn csv_round_trip_is_exact(d in any_dataset()) {
        let text = d.to_csv_string();
        let back = load_dataset(text.as_bytes(), d.variables(), LoadOptions::default()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn displacement_is_idempotent(d in any_dataset(), minimum in prop::sample::select(vec![1.0, 0.5, 10.0])) {
        let once = displace_to_positive(&d, minimum);
        let twice = displace_to_positive(&once, minimum);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.values().iter().flatten().all(|v| *v >= minimum));
    }

    #[test]
    fn log_replay_reconstructs(d in any_dataset()) {
        let processed = displace_to_positive(&d, 1.0);
        let replayed = d.replay(processed.log()).unwrap();
        prop_assert_eq!(replayed, processed);
    }
}

#[test]
fn displaced_input_leaves_vrs_scores_unchanged() {
    let mut r = common::rng(11);
    let base = common::random_instance(&mut r, 12, 2, 2);
    // push the first input negative, then displace it two different ways
    let raw = base.map_column(0, |v| v - 8.0).unwrap();
    let a = displace_to_positive(&raw, 1.0);
    let b = displace_to_positive(&raw, 0.5);
    assert!(a.log().displacement("x0") > b.log().displacement("x0"));
    assert_eq!(a.log().displaced_outputs().len(), 0);
    let cfg = DeaModelConfig::vrs();
    let ta = solve_all(&a, &cfg).unwrap();
    let tb = solve_all(&b, &cfg).unwrap();
    let t0 = solve_all(&base, &cfg).unwrap();
    for ((x, y), z) in ta.iter().zip(&tb).zip(&t0) {
        assert!((x.theta - z.theta).abs() <= 1e-9, "{} vs {}", x.theta, z.theta);
        assert!((x.theta - y.theta).abs() <= 1e-9, "{} vs {}", x.theta, y.theta);
    }
}

#[test]
fn fixture_is_reproducible_byte_for_byte() {
    let a = generate_fixture(42, 233, &market_schema());
    assert_eq!((a.n(), a.variables().len()), (233, 20));
    let b = generate_fixture(42, 233, &market_schema());
    assert_eq!(a.to_csv_string().as_bytes(), b.to_csv_string().as_bytes());
    assert_ne!(a, generate_fixture(43, 233, &market_schema()));
}

#[test]
fn fixture_catalog_round_trips_through_csv() {
    let c = fixture_catalog();
    let mut buf = Vec::new();
    c.write_csv(&mut buf).unwrap();
    let back = load_catalog(buf.as_slice()).unwrap();
    assert_eq!(back.len(), CATALOG_SIZE);
    assert_eq!(back, c);
}
