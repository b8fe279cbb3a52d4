mod common;

use gnutellab::analysis::{fit_power_law, robustness_experiment, traffic_estimate, RemovalStrategy};
use gnutellab::graph::{largest_component_fraction, DegreeDistribution};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_power_laws_are_recovered(k in 0.5f64..3.5, c in 6.0f64..9.0, degrees in prop::collection::btree_set(1usize..200, 2..12)) {
        // Counts are rounded, so keep them large and the degree span wide.
        let scale = 10f64.powf(c);
        let dist = DegreeDistribution::from_counts(degrees.iter().map(|&d| (d, (scale * (d as f64).powf(-k)).round() as usize)));
        let usable = dist.iter().filter(|&(_, n)| n > 0).count();
        let span = dist.max_degree().unwrap() as f64 / *degrees.first().unwrap() as f64;
        prop_assume!(usable >= 2 && span >= 4.0 && dist.iter().all(|(_, n)| n >= 1000));
        let fit = fit_power_law(&dist, 1).unwrap();
        prop_assert!((fit.exponent_k - k).abs() < 0.02, "k {} vs {}", fit.exponent_k, k);
        prop_assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn removing_more_never_grows_the_largest_component(n in 5usize..150, extra in 0usize..150, seed: u64, targeted: bool) {
        let g = common::random_connected(n, extra, seed);
        let strategy = if targeted { RemovalStrategy::Targeted } else { RemovalStrategy::Random };
        let fractions: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let curve = robustness_experiment(&g, strategy, &fractions, seed).unwrap();
        prop_assert_eq!(curve.points[0].largest_component_size, n);
        prop_assert!((curve.points[0].largest_component_fraction - largest_component_fraction(&g)).abs() < 1e-12);
        for w in curve.points.windows(2) {
            prop_assert!(w[1].largest_component_size <= w[0].largest_component_size);
            prop_assert!(w[1].removed >= w[0].removed);
        }
    }

    #[test]
    fn traffic_estimate_is_linear(conns in 1.0f64..1e6, bps in 1.0f64..1e5, factor in 1.0f64..10.0) {
        let a = traffic_estimate(conns, bps);
        let b = traffic_estimate(conns * factor, bps);
        prop_assert!((b.terabytes_per_month() / a.terabytes_per_month() - factor).abs() < 1e-9);
        prop_assert!((a.gbps() * 1e9 - conns * bps).abs() / (conns * bps) < 1e-12);
    }
}
