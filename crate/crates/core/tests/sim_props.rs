use gnutellab::graph::connected_components;
use gnutellab::sim::{calibrate_churn, run, ChurnModel, ConnectionLimits, SimConfig};
use proptest::prelude::*;

fn config(pop: usize, minutes: u32, seed: u64, churn: bool, queries: f64, limit: usize) -> SimConfig {
    let mut c = SimConfig::new(pop, minutes as f64 * 60.0, seed);
    c.max_connections = ConnectionLimits { choices: vec![(limit, 0.5), (limit * 2, 0.5)] };
    c.query_rate_per_hour = queries;
    c.initial_ttl = 4;
    c.snapshot_times_s = (0..minutes).map(|m| m as f64 * 60.0 + 0.5).collect();
    if churn {
        // Short sessions so nodes come and go within the run.
        let law = calibrate_churn((0.05, 0.4), (0.3, 0.75)).unwrap();
        c.churn = Some(ChurnModel::steady_state(law, pop));
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_invariants(pop in 3usize..60, minutes in 1u32..8, seed: u64, churn: bool, queries in 0.0f64..200.0, limit in 2usize..8) {
        let c = config(pop, minutes, seed, churn, queries, limit);
        let r = run(&c).unwrap();
        let k = r.conservation;
        prop_assert_eq!(k.delivered + k.dropped_departed + k.ttl_expired, k.transmissions);
        prop_assert_eq!(k.transmissions, r.total_messages());
        prop_assert_eq!(r.total_bytes(), r.link_recount_bytes());
        for (_, g) in &r.snapshots {
            for id in g.node_ids() {
                prop_assert!(g.degree(id) <= r.history.node(id).unwrap().max_connections);
            }
        }
        if !churn {
            prop_assert_eq!(k.dropped_departed, 0);
        }
        prop_assert_eq!(run(&c).unwrap(), r);
    }

    #[test]
    fn static_population_forms_one_component(pop in 3usize..150, seed: u64) {
        let mut c = SimConfig::new(pop, 120.0, seed);
        c.snapshot_times_s = vec![60.0];
        let r = run(&c).unwrap();
        let (_, g) = &r.snapshots[0];
        prop_assert_eq!(g.node_count(), pop);
        prop_assert_eq!(connected_components(g).len(), 1);
    }
}
