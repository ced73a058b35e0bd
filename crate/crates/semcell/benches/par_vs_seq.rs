//! Parallel vs sequential comparison of the two hot paths: utility-table
//! construction and the full three-stage solve.
//!
//! Run with `cargo bench -p semcell`. Requires the default `parallel`
//! feature; the sequential path is always compiled, so both appear side by
//! side in one report.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use semcell::alloc::RbAllocator;
use semcell::assoc::{associate, TableSet};
use semcell::scenario::{generate, GenConfig};
use semcell::utility::UtilityKind;

fn bench_tables(c: &mut Criterion) {
    let scenario = generate(&GenConfig {
        num_bs: 3,
        num_wd: 10,
        seed: 1,
        rb_count_choices: vec![25, 50],
        ..GenConfig::default()
    })
    .unwrap();
    let kind = UtilityKind::ConcaveAccuracy;

    let mut g = c.benchmark_group("utility_tables");
    g.bench_with_input(BenchmarkId::new("parallel", "3x10"), &scenario, |b, s| {
        b.iter(|| TableSet::build(s, kind));
    });
    g.bench_with_input(BenchmarkId::new("sequential", "3x10"), &scenario, |b, s| {
        b.iter(|| TableSet::build_sequential(s, kind));
    });
    g.finish();
}

fn bench_solve(c: &mut Criterion) {
    let scenario = generate(&GenConfig {
        num_bs: 3,
        num_wd: 10,
        seed: 2,
        rb_count_choices: vec![25, 50],
        ..GenConfig::default()
    })
    .unwrap();
    let kind = UtilityKind::ConcaveAccuracy;

    let mut g = c.benchmark_group("three_stage_solve");
    g.bench_function("parallel_tables", |b| {
        b.iter(|| {
            let tables = TableSet::build(&scenario, kind);
            associate(&scenario, &tables, RbAllocator::Greedy)
        });
    });
    g.bench_function("sequential_tables", |b| {
        b.iter(|| {
            let tables = TableSet::build_sequential(&scenario, kind);
            associate(&scenario, &tables, RbAllocator::Greedy)
        });
    });
    g.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3))
        .sample_size(10);
    targets = bench_tables, bench_solve
);

criterion_main!(benches);
