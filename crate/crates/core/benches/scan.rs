use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frob_core::harness::{count_fermat_pseudoprimes, scan_range_with, ScanOptions};
use frob_core::structure::multiple_factor_sweep;
use frob_core::{frobenius_test, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan_range");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = ScanOptions { shard_count: 16, block_width: 1 << 16, exec };
        g.bench_with_input(BenchmarkId::new(name, "3..1e6"), &opts, |b, &opts| {
            b.iter(|| scan_range_with(3, black_box(1_000_000), opts, None).unwrap())
        });
    }
    g.finish();
}

fn fermat(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_fermat_pseudoprimes");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "1e7 base 2"), &exec, |b, &exec| {
            b.iter(|| count_fermat_pseudoprimes(black_box(10_000_000), &[2], exec).unwrap())
        });
    }
    g.finish();
}

fn multiple(c: &mut Criterion) {
    let mut g = c.benchmark_group("multiple_factor_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "p<1e5 c<128"), &exec, |b, &exec| {
            b.iter(|| multiple_factor_sweep(black_box(100_000), 128, exec).unwrap())
        });
    }
    g.finish();
}

fn single(c: &mut Criterion) {
    c.bench_function("frobenius_test 64-bit prime", |b| {
        b.iter(|| frobenius_test(black_box(18_446_744_073_709_551_557)))
    });
}

criterion_group!(benches, scan, fermat, multiple, single);
criterion_main!(benches);
