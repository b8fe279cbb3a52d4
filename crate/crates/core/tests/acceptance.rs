//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use gnutellab::analysis::{
    fit_multimodal, fit_power_law, robustness_experiment, traffic_estimate, RemovalStrategy, DEFAULT_KNEE_CANDIDATES,
};
use gnutellab::crawler::{crawl, snapshot_fidelity, CrawlConfig, StaticNetwork};
use gnutellab::graph::{
    assign_labels, generate_multimodal, generate_preferential_attachment, path_length_distribution, DegreeDistribution,
    LabelScheme, MultimodalParams, PathMode, WeightedLabels,
};
use gnutellab::mismatch::{
    clustering_entropy, entropy_reduction, fixtures, label_entropy, link_stress, ClusterPartition, LabelDistribution,
};
use gnutellab::protocol::{flood, flood_logged, FloodConfig, MessageKind};
use gnutellab::sim::{calibrate_churn, preset, run, traffic_report, ChurnModel, SimConfig};
use gnutellab::NodeId;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("entropy inequality", entropy_inequality),
        ("entropy values", entropy_values),
        ("entropy reduction", entropy_reduction_finding),
        ("link stress fixtures", link_stress_fixtures),
        ("traffic estimate", traffic_estimate_figures),
        ("churn calibration", churn_calibration),
        ("power-law fits", power_law_fits),
        ("protocol conformance", protocol_conformance),
        ("crawler exactness", crawler_exactness),
        ("snapshot fidelity under churn", snapshot_fidelity_under_churn),
        ("robustness asymmetry", robustness_asymmetry),
        ("path lengths", path_lengths),
        ("traffic mix presets", traffic_mix),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{status} {:>2} {name}: {} [{:.1}s]", i + 1, o.detail, t0.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn entropy_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    for _ in 0..1_000 {
        let n = rng.random_range(1..=500);
        let labels = rng.random_range(1..=20);
        let names: HashMap<NodeId, String> =
            (0..n).map(|i| (NodeId(i), format!("l{}", rng.random_range(0..labels)))).collect();
        let whole = label_entropy(&LabelDistribution::from_labels(names.values().map(String::as_str)).unwrap());
        for _ in 0..10 {
            let parts = rng.random_range(1..=n);
            let mut ids: Vec<NodeId> = (0..n).map(NodeId).collect();
            ids.shuffle(&mut rng);
            let mut clusters = vec![Vec::new(); parts];
            for id in ids {
                clusters[rng.random_range(0..parts)].push(id);
            }
            clusters.retain(|c: &Vec<NodeId>| !c.is_empty());
            let p = ClusterPartition { clusters, residual_index: None };
            worst = worst.min(whole - clustering_entropy(&p, &names).unwrap());
        }
    }
    outcome(worst >= -1e-9, format!("min(whole - clustered) = {worst:.3e} over 10,000 partitions"))
}

fn entropy_values() -> Outcome {
    // Independent calculator: natural logs converted to bits.
    let oracle = |ps: &[f64]| -> f64 {
        ps.iter()
            .map(|&p| {
                let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
                (h(p) + h(1.0 - p)) / std::f64::consts::LN_2
            })
            .sum()
    };
    let single = label_entropy(&LabelDistribution::from_labels(["a"; 7]).unwrap());
    let even = label_entropy(&LabelDistribution::from_labels(["a", "b"]).unwrap());
    let skew = label_entropy(&LabelDistribution::from_labels(["a", "a", "a", "b"]).unwrap());
    let expected = oracle(&[0.75, 0.25]);
    let pass = single == 0.0 && even == 2.0 && (skew - 1.62256).abs() < 1e-4 && (skew - expected).abs() < 1e-12;
    outcome(pass, format!("single {single}, 0.5/0.5 {even}, 0.75/0.25 {skew:.6} (oracle {expected:.6})"))
}

const ACCEPT_HUB_THRESHOLD: usize = 20;

fn entropy_reduction_finding() -> Outcome {
    let results: Vec<(f64, f64, f64)> = thread::scope(|s| {
        let handles: Vec<_> = (0..10u64)
            .map(|seed| {
                s.spawn(move || {
                    let base = generate_multimodal(&MultimodalParams::new(10_000, 100 + seed)).unwrap();
                    let mut ind = base.clone();
                    let uniform = WeightedLabels::uniform("dom", 10).unwrap();
                    let scheme = LabelScheme::Independent { domains: uniform.clone(), ases: uniform };
                    assign_labels(&mut ind, &scheme, seed).unwrap();
                    let mut cor = base;
                    assign_labels(&mut cor, &LabelScheme::topology_correlated(0.9), seed).unwrap();
                    (
                        entropy_reduction(&ind, ACCEPT_HUB_THRESHOLD).reduction,
                        entropy_reduction(&ind, 10).reduction,
                        entropy_reduction(&cor, ACCEPT_HUB_THRESHOLD).reduction,
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let ind_max = results.iter().map(|r| r.0).fold(f64::MIN, f64::max);
    let ind10_max = results.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let cor_min = results.iter().map(|r| r.2).fold(f64::MAX, f64::min);
    outcome(
        ind_max < 0.08 && cor_min > 0.5,
        format!(
            "hub threshold {ACCEPT_HUB_THRESHOLD}: independent max {ind_max:.4} (< 0.08), correlated min {cor_min:.4} \
             (> 0.5); independent max at threshold 10: {ind10_max:.4}"
        ),
    )
}

fn link_stress_fixtures() -> Outcome {
    let u = fixtures::underlay();
    let (a, b) = fixtures::cross_link();
    let (mo, mp) = fixtures::matched_overlay();
    let (xo, xp) = fixtures::mismatched_overlay();
    let matched = link_stress(&mo, &u, &mp, fixtures::source(), 7).unwrap().count(a, b);
    let mismatched = link_stress(&xo, &u, &xp, fixtures::source(), 7).unwrap().count(a, b);
    outcome(matched == 1 && mismatched == 6, format!("D-E carries {matched} (matched) and {mismatched} (mismatched)"))
}

fn traffic_estimate_figures() -> Outcome {
    let t = traffic_estimate(170_000.0, 6_000.0);
    // Integer oracle: bits/s, then bytes over a 30-day month.
    let bps: u128 = 170_000 * 6_000;
    let bytes: u128 = bps / 8 * 30 * 24 * 3_600;
    let pass = t.aggregate_bps == bps as f64
        && t.aggregate_bps == 1.02e9
        && t.bytes_per_month == bytes as f64
        && bytes == 330_480_000_000_000
        && (t.terabytes_per_month() - 330.48).abs() < 1e-9;
    outcome(pass, format!("{:.4e} bps, {:.2} TB/month", t.aggregate_bps, t.terabytes_per_month()))
}

fn churn_calibration() -> Outcome {
    let law = calibrate_churn((4.0, 0.40), (24.0, 0.75)).unwrap();
    let (c4, c24) = (law.cdf(4.0), law.cdf(24.0));
    let mut c = SimConfig::new(1_000, 48.0 * 3_600.0, 6);
    c.churn = Some(ChurnModel::steady_state(law, 1_000));
    c.ping_period_s = 6.0 * 3_600.0;
    c.initial_ttl = 4;
    let r = run(&c).unwrap();
    let n = r.sessions.len() as f64;
    let short = r.sessions.iter().filter(|s| s.length_h < 4.0).count() as f64 / n;
    let long = r.sessions.iter().filter(|s| s.length_h > 24.0).count() as f64 / n;
    let pass = (c4 - 0.40).abs() < 1e-6
        && (c24 - 0.75).abs() < 1e-6
        && (short - 0.40).abs() <= 0.03
        && (long - 0.25).abs() <= 0.03;
    outcome(
        pass,
        format!(
            "shape {:.6}, scale {:.4} h, CDF(4) {c4:.8}, CDF(24) {c24:.8}; {} sessions: <4h {short:.3}, >24h {long:.3}",
            law.shape, law.scale_hours, n
        ),
    )
}

fn power_law_fits() -> Outcome {
    let two = fit_power_law(&DegreeDistribution::from_counts([(1, 1000), (10, 10)]), 1).unwrap();
    let rounded: Vec<(usize, usize)> =
        (1..=50).map(|l| (l, (10_000.0 * (l as f64).powi(-2)).round() as usize)).collect();
    let sq = fit_power_law(&DegreeDistribution::from_counts(rounded), 1).unwrap();
    let mut head: Vec<(usize, usize)> = (1..10).map(|l| (l, 100)).collect();
    head.extend((10..=300).map(|l| (l, (2.0e5 * (l as f64).powf(-2.3)).round() as usize)));
    let mm = fit_multimodal(&DegreeDistribution::from_counts(head), DEFAULT_KNEE_CANDIDATES).unwrap();
    let pass = (two.exponent_k - 2.0).abs() < 1e-12
        && (two.r_squared - 1.0).abs() < 1e-12
        && (sq.exponent_k - 2.0).abs() <= 0.05
        && mm.knee == 10
        && (mm.tail.exponent_k - 2.3).abs() <= 0.3;
    outcome(
        pass,
        format!(
            "two-point k {:.6} r2 {:.6}; rounded L^-2 k {:.4}; multimodal knee {} tail k {:.3}",
            two.exponent_k, two.r_squared, sq.exponent_k, mm.knee, mm.tail.exponent_k
        ),
    )
}

fn protocol_conformance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = Vec::new();
    for trial in 0..100 {
        let n = rng.random_range(2..=200);
        let g = common::random_connected(n, rng.random_range(0..2 * n), rng.random());
        let source = NodeId(rng.random_range(0..n));
        let (t, log) = flood_logged(&g, source, MessageKind::Ping, 7, &FloodConfig::default()).unwrap();
        let dup = t.processed.iter().any(|&p| p > 1);
        let budget = log.iter().any(|m| if m.kind.is_broadcast() { m.ttl + m.hops != 7 } else { m.ttl + m.hops > 7 });
        let pongs =
            t.replies.len() != t.reached_count() - 1 || t.replies.iter().any(|r| r.request_hops != r.reverse_hops);
        if dup || budget || pongs {
            bad.push(trial);
        }
    }
    // Ring 0-1-2-3-0 from 0: 0 sends to 1 and 3 (2), 1 and 3 each forward to
    // 2 (2), and 2 forwards whichever copy it processes first to the other
    // side (1). Total 5.
    let mut ring = gnutellab::OverlayGraph::with_synthetic_nodes(4);
    for i in 0..4 {
        ring.add_edge(NodeId(i), NodeId((i + 1) % 4)).unwrap();
    }
    let pings = flood(&ring, NodeId(0), MessageKind::Ping, 7).unwrap().total(MessageKind::Ping);
    outcome(
        bad.is_empty() && pings == 5,
        format!("100 random graphs, {} violations; ring-of-4 PINGs {pings}", bad.len()),
    )
}

fn crawler_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    let mut nodes = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=1_000);
        let g = common::random_connected(n, rng.random_range(0..3 * n), rng.random());
        let net = StaticNetwork::new(g.clone());
        let seed_node = vec![NodeId(rng.random_range(0..n))];
        let one = crawl(&net, &CrawlConfig::new(seed_node.clone(), 1)).unwrap();
        let many = crawl(&net, &CrawlConfig::new(seed_node, 50)).unwrap();
        let exact = one.graph.node_ids().collect::<BTreeSet<_>>() == g.node_ids().collect::<BTreeSet<_>>()
            && common::edge_set(&one.graph) == common::edge_set(&g);
        if !exact || one.graph != many.graph || one.reported_only != many.reported_only {
            mismatches += 1;
        }
        nodes += n;
    }
    outcome(mismatches == 0, format!("100 graphs ({nodes} nodes), {mismatches} inexact or order-dependent"))
}

fn snapshot_fidelity_under_churn() -> Outcome {
    let law = calibrate_churn((4.0, 0.40), (24.0, 0.75)).unwrap();
    let rows: Vec<(u64, f64, f64, f64, f64)> = thread::scope(|s| {
        let handles: Vec<_> = (1..=3u64)
            .map(|seed| {
                s.spawn(move || {
                    let mut c = SimConfig::new(5_000, 48.0 * 3_600.0, seed);
                    c.churn = Some(ChurnModel::steady_state(law, 5_000));
                    c.ping_period_s = 6.0 * 3_600.0;
                    c.initial_ttl = 2;
                    let r = run(&c).unwrap();
                    let h = &r.history;
                    let start = 4.0 * 3_600.0;
                    let seeds: Vec<NodeId> =
                        h.live_at(start).filter(|&id| !h.node(id).unwrap().known_host).take(20).collect();
                    let mut fidelity = Vec::new();
                    for workers in [50, 1] {
                        let mut cc = CrawlConfig::new(seeds.clone(), workers);
                        cc.start_s = start;
                        let snap = crawl(h, &cc).unwrap();
                        let truth = h.graph_at(snap.midpoint());
                        fidelity.push((snap_fid(&truth, &snap), (snap.finished_at - snap.started_at) / 3_600.0));
                    }
                    (seed, fidelity[0].0, fidelity[1].0, fidelity[0].1, fidelity[1].1)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let pass = rows.iter().all(|&(_, fast, slow, _, _)| fast < 0.1 && fast <= slow);
    let detail = rows
        .iter()
        .map(|(s, f, sl, fd, sd)| format!("seed {s}: fast {f:.4} ({fd:.1} h) vs slow {sl:.4} ({sd:.1} h)"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, format!("degree TV distance, {detail}"))
}

fn snap_fid(truth: &gnutellab::OverlayGraph, snap: &gnutellab::CrawlSnapshot) -> f64 {
    snapshot_fidelity(truth, snap).degree_distance
}

fn robustness_asymmetry() -> Outcome {
    let rows: Vec<(f64, f64)> = thread::scope(|s| {
        let handles: Vec<_> = (0..10u64)
            .map(|seed| {
                s.spawn(move || {
                    let g = generate_preferential_attachment(10_000, 2, 200 + seed).unwrap();
                    let lcc = |strategy| {
                        robustness_experiment(&g, strategy, &[0.05], seed).unwrap().points[0].largest_component_fraction
                    };
                    (lcc(RemovalStrategy::Targeted), lcc(RemovalStrategy::Random))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let pass = rows.iter().all(|&(t, r)| t < r);
    let worst_gap = rows.iter().map(|&(t, r)| r - t).fold(f64::MAX, f64::min);
    let mean_t = rows.iter().map(|r| r.0).sum::<f64>() / 10.0;
    let mean_r = rows.iter().map(|r| r.1).sum::<f64>() / 10.0;
    outcome(pass, format!("mean LCC targeted {mean_t:.4} vs random {mean_r:.4}, smallest gap {worst_gap:.4}"))
}

fn path_lengths() -> Outcome {
    let g = generate_multimodal(&MultimodalParams::new(10_000, 12)).unwrap();
    let d = path_length_distribution(&g, PathMode::Sampled { sources: 1_000, seed: 12 });
    let p95 = d.pct(0.95).unwrap();
    let max = d.max_distance().unwrap();
    let cpn = g.edge_count() as f64 / g.node_count() as f64;
    outcome(
        (6..=8).contains(&p95) && max <= 13,
        format!("{cpn:.2} connections/node, 95th percentile {p95} hops, max observed {max}"),
    )
}

fn traffic_mix() -> Outcome {
    let mid = traffic_report(&run(&preset("mid2001", 13).unwrap()).unwrap()).unwrap();
    let nov = traffic_report(&run(&preset("nov2000", 13).unwrap()).unwrap()).unwrap();
    let q = mid.message_fraction(MessageKind::Query);
    let pp = nov.byte_fraction(MessageKind::Ping) + nov.byte_fraction(MessageKind::Pong);
    outcome(
        (q - 0.92).abs() <= 0.05 && pp >= 0.5,
        format!("mid2001 QUERY message fraction {q:.4}; nov2000 PING+PONG byte fraction {pp:.4}"),
    )
}
