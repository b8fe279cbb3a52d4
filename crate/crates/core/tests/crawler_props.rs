mod common;

use std::collections::{BTreeSet, HashSet};

use gnutellab::crawler::{crawl, endpoint_key, ContactOutcome, CrawlConfig, StaticNetwork};
use gnutellab::sim::{calibrate_churn, run, ChurnModel, SimConfig};
use gnutellab::NodeId;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn limited_network(n: usize, extra: usize, seed: u64, refusing: f64) -> StaticNetwork {
    let g = common::random_connected(n, extra, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let mut net = StaticNetwork::new(g.clone());
    for id in g.node_ids() {
        if rng.random_bool(refusing) {
            net = net.with_limit(id, g.degree(id));
        }
    }
    net
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn static_crawl_recovers_the_contactable_reach(
        n in 1usize..300, extra in 0usize..300, seed: u64, refusing in 0.0f64..0.3, workers in 1usize..60, seeds in 1usize..4,
    ) {
        let net = limited_network(n, extra, seed, refusing);
        let start: Vec<NodeId> = (0..seeds).map(|i| NodeId((i * 7919) % n)).collect();
        let mut cfg = CrawlConfig::new(start.clone(), workers);
        cfg.threads = 1 + (seed % 3) as usize;
        let snap = crawl(&net, &cfg).unwrap();

        let expected = common::contactable_reach(&net, &start);
        let got: BTreeSet<NodeId> = snap.graph.node_ids().collect();
        prop_assert_eq!(&got, &expected);
        let expected_edges: BTreeSet<_> =
            net.graph.edges().filter(|(a, b)| expected.contains(a) && expected.contains(b)).collect();
        prop_assert_eq!(common::edge_set(&snap.graph), expected_edges);

        let contacted: Vec<NodeId> = snap.contacts.iter().map(|c| c.node).collect();
        prop_assert_eq!(contacted.iter().collect::<HashSet<_>>().len(), contacted.len());
        let confirmed: HashSet<String> = snap.graph.nodes().map(|(_, i)| endpoint_key(i)).collect();
        prop_assert!(snap.reported_only.iter().all(|e| !confirmed.contains(e)));

        let mut seq = cfg.clone();
        seq.workers = 1;
        seq.threads = 1;
        let one = crawl(&net, &seq).unwrap();
        prop_assert_eq!(&one.graph, &snap.graph);
        prop_assert_eq!(&one.reported_only, &snap.reported_only);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn churning_crawl_edges_were_witnessed(seed: u64, workers in 1usize..20) {
        let mut c = SimConfig::new(300, 4.0 * 3600.0, seed);
        let law = calibrate_churn((0.5, 0.4), (3.0, 0.75)).unwrap();
        c.churn = Some(ChurnModel::steady_state(law, 300));
        c.ping_period_s = 3600.0;
        c.initial_ttl = 2;
        let r = run(&c).unwrap();
        let h = &r.history;
        let seeds: Vec<NodeId> = h.live_at(600.0).skip(3).take(5).collect();
        let mut cfg = CrawlConfig::new(seeds, workers);
        cfg.start_s = 600.0;
        let snap = crawl(h, &cfg).unwrap();
        let contacted: Vec<NodeId> = snap.contacts.iter().map(|c| c.node).collect();
        prop_assert_eq!(contacted.iter().collect::<HashSet<_>>().len(), contacted.len());
        for (a, b) in snap.graph.edges() {
            let seen = snap.contacts.iter().any(|c| {
                c.outcome == ContactOutcome::Confirmed
                    && ((c.node == a && h.neighbors_at(a, c.started_s).contains(&b))
                        || (c.node == b && h.neighbors_at(b, c.started_s).contains(&a)))
            });
            prop_assert!(seen, "edge {}-{} never reported", a, b);
        }
        prop_assert!(snap.finished_at <= h.horizon_s() + cfg.listen_timeout_s);
    }
}

#[test]
fn snapshot_directory_round_trips() {
    let net = limited_network(40, 30, 5, 0.2);
    let snap = crawl(&net, &CrawlConfig::new(vec![NodeId(0)], 4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    snap.write_dir(dir.path()).unwrap();
    assert_eq!(gnutellab::graph::load_graph(dir.path().join("graph.txt")).unwrap(), snap.graph);
    let reported: BTreeSet<String> = std::fs::read_to_string(dir.path().join("reported_only.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_string)
        .collect();
    assert_eq!(reported, snap.reported_only);
    let meta = std::fs::read_to_string(dir.path().join("meta.csv")).unwrap();
    assert_eq!(
        meta.lines().nth(1).unwrap(),
        format!("{},{},{},{}", snap.started_at, snap.finished_at, snap.graph.node_count(), snap.reported_only.len())
    );
}
