use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pglcover::cover::{exact_covering_radius, sample_distances, SearchOptions};
use pglcover::{certify, distance_to_group, Exec, Group, WitnessContext};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_distance(c: &mut Criterion) {
    let ctx = WitnessContext::for_q(31, 0).unwrap();
    let mut group = c.benchmark_group("distance_to_group_q31");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| distance_to_group(ctx.witness(), ctx.group(), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_certify(c: &mut Criterion) {
    let ctx = WitnessContext::for_q(19, 0).unwrap();
    let mut group = c.benchmark_group("certify_q19");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| certify(&ctx, exec).unwrap()));
    }
    group.finish();
}

fn bench_exact_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_cr_q8");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SearchOptions { exec, ..SearchOptions::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exact_covering_radius(8, &opts).unwrap())
        });
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let g = Group::for_q(13).unwrap();
    let mut group = c.benchmark_group("sample_q13_10k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_distances(&g, 10_000, 42, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_distance, bench_certify, bench_exact_search, bench_sampling);
criterion_main!(benches);
