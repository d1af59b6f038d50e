use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use frameforge::{
    find_schedule, min_norm, nk_norm, split_operator, validate_schedule, AmbientSpace, CanonicalBasis,
    Example23, NkSchedule,
};
use frameforge_bench::{banded_operator, dense_vector};

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_norm");
    for len in [8, 16, 32] {
        let a = dense_vector(len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &a, |b, a| {
            b.iter(|| min_norm(&Example23, black_box(a)))
        });
    }
    g.finish();

    let sched = NkSchedule::successor();
    let mut g = c.benchmark_group("nk_norm");
    for len in [8, 16] {
        let a = dense_vector(len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &a, |b, a| {
            b.iter(|| nk_norm(&Example23, black_box(a), &sched).unwrap())
        });
    }
    g.finish();
}

fn schedules(c: &mut Criterion) {
    let frame = CanonicalBasis(AmbientSpace::L2);
    c.bench_function("find_schedule/example23/12", |b| b.iter(|| find_schedule(&Example23, 12).unwrap()));
    let sched = NkSchedule::successor();
    c.bench_function("validate_schedule/canonical/h30", |b| {
        b.iter(|| validate_schedule(&frame, &sched, 6, black_box(30)).unwrap())
    });
}

fn splitting(c: &mut Criterion) {
    let a = banded_operator(6, 3);
    c.bench_function("split_operator/rank3/m5", |b| b.iter(|| split_operator(black_box(&a), 5).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = norms, schedules, splitting
}
criterion_main!(benches);
