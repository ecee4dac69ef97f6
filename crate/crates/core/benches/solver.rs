//! Sequential vs parallel execution of the data-parallel kernels.
//!
//! With `--no-default-features` both variants run sequentially, which gives
//! the baseline for the rayon overhead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gpfree_core::apfree::rk_bruteforce_oracle_with;
use gpfree_core::*;

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn table_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk_table");
    group.sample_size(10);
    for (k, ell) in [(3usize, 60usize), (4, 45)] {
        for (name, par) in MODES {
            let cfg = SolverConfig {
                node_budget: None,
                parallelism: par,
            };
            group.bench_with_input(
                BenchmarkId::new(name, format!("k{k}_l{ell}")),
                &(k, ell),
                |b, &(k, ell)| b.iter(|| rk_table(black_box(k), black_box(ell), &cfg).unwrap()),
            );
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk_oracle");
    group.sample_size(10);
    for (name, par) in MODES {
        group.bench_function(BenchmarkId::new(name, "k3_l22"), |b| {
            b.iter(|| rk_bruteforce_oracle_with(3, black_box(22), 25, par).unwrap())
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let table = rk_table(3, 24, &SolverConfig::default()).unwrap();
    let ns: Vec<u64> = (1..=64).map(|i| i * 150_000).collect();
    let mut group = c.benchmark_group("sweeps");
    for (name, par) in MODES {
        group.bench_function(BenchmarkId::new(name, "compare_k3_n5000"), |b| {
            b.iter(|| monotonicity_experiment(3, 2, 3, black_box(5_000), &table, par).unwrap())
        });
        group.bench_function(BenchmarkId::new(name, "convergence_k3_64pts"), |b| {
            b.iter(|| convergence_experiment(3, 2, black_box(&ns), &table, par).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, table_build, oracle, sweeps);
criterion_main!(benches);
