mod common;

use proptest::prelude::*;

use common::items;
use ebpps::verify::closed_form_rho;
use ebpps::{Sampler, SeededRng, WeightedItem};

fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)),
        Just(1.0),
        (1u32..20).prop_map(f64::from),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn state_stays_well_formed(weights in prop::collection::vec(weight(), 1..80), n in 1usize..12, seed: u64) {
        let mut s = Sampler::with_bound(n, seed).unwrap();
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            s.process(WeightedItem::new(i, w).unwrap()).unwrap();
            total += w;
            let latent = s.latent();
            prop_assert!(latent.check_structure().is_ok());
            prop_assert!(latent.is_distinct());
            prop_assert!(latent.latent_size() <= n as f64 + 1e-12);
            let want = closed_form_rho(&weights[..=i], n) * total;
            prop_assert!((latent.latent_size() - want).abs() <= 1e-9 * want.max(1.0));
            let c = s.counter();
            prop_assert!(c.is_consistent());
            prop_assert!(c.total_discards() <= c.items_seen());
            let c = latent.latent_size();
            let sample = s.extract();
            prop_assert!(sample.len() <= n);
            prop_assert!(sample.len() == c.floor() as usize || sample.len() == c.ceil() as usize);
        }
    }

    #[test]
    fn rho_never_increases(weights in prop::collection::vec(weight(), 1..60), n in 1usize..8) {
        let mut s = Sampler::with_bound(n, 0).unwrap();
        let mut last = f64::INFINITY;
        for (i, &w) in weights.iter().enumerate() {
            s.process(WeightedItem::new(i, w).unwrap()).unwrap();
            prop_assert!(s.rho() <= last);
            last = s.rho();
        }
    }

    #[test]
    fn rejected_items_leave_no_trace(
        weights in prop::collection::vec(weight(), 1..30),
        bad in prop_oneof![Just(0.0), Just(-1.0), Just(f64::NAN), Just(f64::INFINITY)],
        seed: u64,
    ) {
        let mut s = Sampler::with_bound(4, seed).unwrap();
        s.process_all(items(&weights)).unwrap();
        let before = s.snapshot_json();
        let rejected = s.process(WeightedItem { id: 999, weight: bad });
        prop_assert!(rejected.is_err());
        prop_assert_eq!(before, s.snapshot_json());
    }

    #[test]
    fn snapshot_round_trips(weights in prop::collection::vec(weight(), 0..40), n in 1usize..6, seed: u64) {
        let mut s = Sampler::with_bound(n, seed).unwrap();
        s.process_all(items(&weights)).unwrap();
        let json = s.snapshot_json();
        let mut r: Sampler<usize> = Sampler::restore_json(&json).unwrap();
        prop_assert_eq!(&json, &r.snapshot_json());
        prop_assert_eq!(s.extract(), r.extract());
    }

    #[test]
    fn external_rng_matches_internal_semantics(weights in prop::collection::vec(weight(), 1..40), n in 1usize..6, seed: u64) {
        let mut s: Sampler<usize> = Sampler::with_bound(n, seed).unwrap();
        let mut rng = SeededRng::new(seed);
        for item in items(&weights) {
            s.process_with(item, &mut rng).unwrap();
        }
        prop_assert!(s.latent().check_structure().is_ok());
        let want = closed_form_rho(&weights, n);
        prop_assert!((s.rho() - want).abs() <= 1e-15 * want);
    }
}

#[test]
fn uniform_stream_fills_exactly() {
    let mut s = Sampler::with_bound(100, 3).unwrap();
    for i in 0..100_000u64 {
        s.process(WeightedItem::new(i, 1.0).unwrap()).unwrap();
    }
    assert_eq!(s.latent().latent_size(), 100.0);
    assert!(s.latent().partial_item().is_none());
    assert_eq!(s.extract().len(), 100);
    assert!(s.counter().total_discards() <= 100_000);
}

#[test]
fn extraction_does_not_perturb_processing() {
    let weights: Vec<f64> = (0..200).map(|i| 1.0 + (i % 13) as f64).collect();
    let mut a = Sampler::with_bound(7, 11).unwrap();
    let mut b = Sampler::with_bound(7, 11).unwrap();
    for item in items(&weights) {
        a.process(item.clone()).unwrap();
        b.process(item).unwrap();
        let _ = a.extract();
    }
    assert_eq!(a.latent(), b.latent());
}
