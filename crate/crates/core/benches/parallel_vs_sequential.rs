use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use zk_core::fields::{random_suite, SuiteSpec};
use zk_core::grid::Grid2D;
use zk_core::multiplier::SymbolKind;
use zk_core::par;
use zk_core::propagator::free_evolve_unchecked;
use zk_core::stein::{stein_derivative, SteinQuadratureConfig};

fn modes() -> [(&'static str, bool); 2] {
    [("sequential", false), ("parallel", true)]
}

fn suite_propagation(c: &mut Criterion) {
    let grid = Grid2D::square(128, 20.0).unwrap();
    let suite = random_suite(grid, 16, 7, &SuiteSpec::default());
    let mut group = c.benchmark_group("free_evolve_suite");
    for (label, on) in modes() {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            par::set_parallel(on);
            b.iter(|| par::map(&suite, |f| free_evolve_unchecked(black_box(f), 1.0, SymbolKind::Symmetrized)))
        });
    }
    group.finish();
    par::set_parallel(true);
}

fn stein(c: &mut Criterion) {
    let grid = Grid2D::square(128, 20.0).unwrap();
    let f = random_suite(grid, 1, 3, &SuiteSpec::default()).remove(0);
    let cfg = SteinQuadratureConfig::for_grid(&grid, 0.5);
    let mut group = c.benchmark_group("stein_derivative");
    group.sample_size(20);
    for (label, on) in modes() {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            par::set_parallel(on);
            b.iter(|| stein_derivative(black_box(&f), 0.5, &cfg).unwrap())
        });
    }
    group.finish();
    par::set_parallel(true);
}

criterion_group!(benches, suite_propagation, stein);
criterion_main!(benches);
