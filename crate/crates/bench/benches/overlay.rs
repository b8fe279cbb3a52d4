use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gnutellab::analysis::{robustness_experiment, RemovalStrategy};
use gnutellab::crawler::crawl;
use gnutellab::graph::{
    generate_multimodal, generate_preferential_attachment, path_length_distribution, MultimodalParams, PathMode,
};
use gnutellab::protocol::flood;
use gnutellab::sim::{preset, run};
use gnutellab::{CrawlConfig, MessageKind, NodeId, StaticNetwork};

fn generators(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    for n in [1_000, 10_000] {
        g.bench_with_input(BenchmarkId::new("ba", n), &n, |b, &n| {
            b.iter(|| generate_preferential_attachment(n, 2, 1).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("multimodal", n), &n, |b, &n| {
            b.iter(|| generate_multimodal(&MultimodalParams::new(n, 1)).unwrap())
        });
    }
    g.finish();
}

fn flooding(c: &mut Criterion) {
    let graph = generate_multimodal(&MultimodalParams::new(10_000, 1)).unwrap();
    let mut g = c.benchmark_group("flood");
    for ttl in [4, 7] {
        g.bench_with_input(BenchmarkId::new("ping", ttl), &ttl, |b, &ttl| {
            b.iter(|| flood(&graph, black_box(NodeId(0)), MessageKind::Ping, ttl).unwrap())
        });
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let graph = generate_multimodal(&MultimodalParams::new(10_000, 1)).unwrap();
    c.bench_function("paths/sampled_100", |b| {
        b.iter(|| path_length_distribution(&graph, PathMode::Sampled { sources: 100, seed: 1 }))
    });
    c.bench_function("robustness/targeted", |b| {
        b.iter(|| robustness_experiment(&graph, RemovalStrategy::Targeted, &[0.05, 0.1, 0.2], 1).unwrap())
    });
}

fn crawling(c: &mut Criterion) {
    let net = StaticNetwork::new(generate_preferential_attachment(5_000, 2, 1).unwrap());
    let mut g = c.benchmark_group("crawl");
    for workers in [1, 50] {
        g.bench_with_input(BenchmarkId::new("static_5000", workers), &workers, |b, &w| {
            b.iter(|| crawl(&net, &CrawlConfig::new(vec![NodeId(0)], w)).unwrap())
        });
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    let mut config = preset("nov2000", 1).unwrap();
    config.duration_s = 120.0;
    g.bench_function("nov2000_120s", |b| b.iter(|| run(&config).unwrap()));
    g.finish();
}

criterion_group!(benches, generators, flooding, metrics, crawling, simulation);
criterion_main!(benches);
