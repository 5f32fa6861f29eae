use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lfembed::analysis::{certify_cases_with, distortion_with};
use lfembed::{embed_space, generate, Exact, Family, MetricSpace, OperatorMode, PairTable, Scalar};

fn spaces<S: Scalar>() -> Vec<(String, MetricSpace<S>)> {
    [
        Family::Grid { dim: 2, radius: 3 },
        Family::RandomTree { n: 60, seed: 1 },
        Family::RandomGraph { n: 60, p: 0.08, seed: 1 },
    ]
    .iter()
    .map(|f| (f.to_string(), generate::<S>(f).expect("generator").space))
    .collect()
}

const MODES: [OperatorMode; 2] = [OperatorMode::Identity, OperatorMode::Random { seed: 1 }];

fn bench_embed(c: &mut Criterion) {
    let mut group = c.benchmark_group("embed");
    group.sample_size(10);
    for (name, space) in spaces::<Exact>() {
        for mode in MODES {
            group.bench_with_input(BenchmarkId::new(format!("rational/{mode}"), &name), &space, |b, s| {
                b.iter(|| embed_space(black_box(s), mode).unwrap())
            });
        }
    }
    for (name, space) in spaces::<f64>() {
        group.bench_with_input(BenchmarkId::new("float/random:1", &name), &space, |b, s| {
            b.iter(|| embed_space(black_box(s), OperatorMode::Random { seed: 1 }).unwrap())
        });
    }
    group.finish();
}

fn bench_analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis");
    group.sample_size(10);
    for (name, space) in spaces::<Exact>() {
        let e = embed_space(&space, OperatorMode::Random { seed: 1 }).unwrap();
        group.bench_function(BenchmarkId::new("pair_table", &name), |b| b.iter(|| PairTable::of(black_box(&e))));
        let table = PairTable::of(&e);
        group.bench_function(BenchmarkId::new("distortion", &name), |b| {
            b.iter(|| distortion_with(black_box(&e), &table))
        });
        group.bench_function(BenchmarkId::new("certify", &name), |b| {
            b.iter(|| certify_cases_with(black_box(&e), &table))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_embed, bench_analysis);
criterion_main!(benches);
