//! Error-analysis suite behavior on constructed weight ensembles.

use tapwise_quant::{quant_error_report, synthetic_tapscaled_weights, Domain, Strategy};
use winograd_core::make_transform_set;

#[test]
fn tap_scaled_ensemble_separates_tapwise_from_layerwise() {
    let ts = make_transform_set(4).unwrap();
    let w = synthetic_tapscaled_weights(8, 8, &ts, 42);
    let layer = quant_error_report(&w, Strategy::Layer, Domain::Winograd, 8, Some(&ts)).unwrap();
    let tap = quant_error_report(&w, Strategy::Tap, Domain::Winograd, 8, Some(&ts)).unwrap();
    assert!(
        tap.mean_log2_rel_error <= layer.mean_log2_rel_error - 1.0,
        "tap {} vs layer {}",
        tap.mean_log2_rel_error,
        layer.mean_log2_rel_error
    );
}

#[test]
fn refining_tap_units_by_channel_never_hurts() {
    let ts = make_transform_set(4).unwrap();
    for seed in [1u64, 7, 42] {
        let w = synthetic_tapscaled_weights(6, 4, &ts, seed);
        let tap = quant_error_report(&w, Strategy::Tap, Domain::Winograd, 8, Some(&ts)).unwrap();
        let both =
            quant_error_report(&w, Strategy::ChannelAndTap, Domain::Winograd, 8, Some(&ts))
                .unwrap();
        // up to grid-search resolution
        assert!(
            both.mean_log2_rel_error <= tap.mean_log2_rel_error + 0.05,
            "seed {seed}: chan+tap {} vs tap {}",
            both.mean_log2_rel_error,
            tap.mean_log2_rel_error
        );
    }
}

#[test]
fn unit_stats_are_reported_per_granularity() {
    let ts = make_transform_set(2).unwrap();
    let w = synthetic_tapscaled_weights(3, 2, &ts, 5);
    let rep = quant_error_report(&w, Strategy::Layer, Domain::Spatial, 8, None).unwrap();
    assert_eq!(rep.units.len(), 1);
    let rep = quant_error_report(&w, Strategy::Channel, Domain::Spatial, 8, None).unwrap();
    assert_eq!(rep.units.len(), 3);
    let rep = quant_error_report(&w, Strategy::Tap, Domain::Winograd, 8, Some(&ts)).unwrap();
    assert_eq!(rep.units.len(), 16);
    let rep =
        quant_error_report(&w, Strategy::ChannelAndTap, Domain::Winograd, 8, Some(&ts)).unwrap();
    assert_eq!(rep.units.len(), 48);
    for u in &rep.units {
        assert!(u.sigma >= 0.0);
        assert!(u.gamma == 0.0 || (0.5..=8.0).contains(&u.gamma));
    }
}

#[test]
fn gamma_search_stays_on_the_documented_grid() {
    let ts = make_transform_set(4).unwrap();
    let w = synthetic_tapscaled_weights(2, 2, &ts, 11);
    let rep = quant_error_report(&w, Strategy::Tap, Domain::Winograd, 8, Some(&ts)).unwrap();
    for u in &rep.units {
        if u.gamma > 0.0 {
            let steps = (u.gamma - 0.5) / 0.01;
            assert!((steps - steps.round()).abs() < 1e-9);
        }
    }
}
