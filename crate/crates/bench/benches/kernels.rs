use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use torsion_bench::{greedy, nowc, rat};
use torsion_core::catalog;
use torsion_core::verifier::{exception_set, Precision};
use torsion_core::{circle_norm, decide, membership, IdealSpec, Schedule, SymbolicSet};

fn norms(c: &mut Criterion) {
    let resolution = rat(1, 1_000_000_000);
    let periodic = greedy(3, 7, 5);
    let blocks = nowc();
    let mut g = c.benchmark_group("circle_norm");
    for k in [10u64, 100, 1000] {
        g.bench_with_input(BenchmarkId::new("periodic", k), &k, |b, &k| b.iter(|| circle_norm(&periodic, black_box(k), &resolution)));
        g.bench_with_input(BenchmarkId::new("nowc", k), &k, |b, &k| b.iter(|| circle_norm(&blocks, black_box(k), &resolution)));
    }
    g.finish();
}

fn exceptions(c: &mut Criterion) {
    let precision = Precision { resolution: rat(1, 1_000_000_000), budget: 512 };
    let d = nowc();
    let mut g = c.benchmark_group("exception_set");
    g.sample_size(10);
    for n in [1000u64, 10_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| exception_set(&d, &rat(1, 4), n, &precision)));
    }
    g.finish();
}

fn ideals(c: &mut Criterion) {
    let blocks = catalog::nowc_support();
    let boundary = blocks.diff(&blocks.shift(1));
    let schedule = Schedule::default();
    c.bench_function("membership/density_boundary", |b| {
        b.iter(|| membership(&IdealSpec::density_zero(), black_box(&boundary), &schedule))
    });
    c.bench_function("membership/fin_squares", |b| {
        b.iter(|| membership(&IdealSpec::fin(), black_box(&SymbolicSet::squares()), &schedule))
    });
}

fn decisions(c: &mut Criterion) {
    let mut g = c.benchmark_group("decide");
    g.sample_size(10);
    for id in ["ce", "prufer", "NoWC"] {
        // fresh context each time, so the membership memo does not carry over
        g.bench_function(id, |b| b.iter(|| decide(&catalog::build(id).unwrap().context)));
    }
    g.finish();
}

criterion_group!(benches, norms, exceptions, ideals, decisions);
criterion_main!(benches);
