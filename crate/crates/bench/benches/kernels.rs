use cohom_bench::{generic, pair, solvable, triple};
use cohom_core::solver1d::{solve_1d, Backend};
use cohom_core::solver_nd::{solve_top, TopOptions};
use cohom_core::tensor_ops::{split, SplitWeight};
use cohom_core::{IrrepParams, TensorParams, Window};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

const RADII: [i64; 3] = [32, 64, 128];

fn apply_x(c: &mut Criterion) {
    let params = pair();
    let mut group = c.benchmark_group("apply_x");
    for r in RADII {
        let f = generic(&params, r);
        group.throughput(Throughput::Elements(f.coeffs().len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(r), &f, |b, f| {
            b.iter(|| f.apply_x(0).unwrap())
        });
    }
    group.finish();
}

fn pi_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("pi_product");
    let reps = [
        ("principal", IrrepParams::principal(0, 1.5)),
        ("complementary", IrrepParams::complementary(0.9).unwrap()),
        ("discrete", IrrepParams::first_discrete(3)),
    ];
    for (name, p) in reps {
        for k in [1_000i64, 100_000] {
            group.bench_with_input(BenchmarkId::new(name, k), &k, |b, &k| {
                b.iter(|| p.pi_product(black_box(k)))
            });
        }
    }
    group.finish();
}

fn one_dimensional(c: &mut Criterion) {
    let params = TensorParams::new(vec![IrrepParams::principal(0, 1.5)]).unwrap();
    let mut group = c.benchmark_group("solve_1d");
    for r in [256i64, 4096] {
        let f = solvable(&params, r);
        group.bench_with_input(BenchmarkId::new("formula", r), &f, |b, f| {
            b.iter(|| solve_1d(f, Backend::Formula, 1e-8).unwrap())
        });
    }
    let f = solvable(&params, 128);
    group.bench_function("lsq/128", |b| b.iter(|| solve_1d(&f, Backend::Lsq, 1e-8).unwrap()));
    group.finish();
}

fn split_and_solve_top(c: &mut Criterion) {
    let params = pair();
    let mut group = c.benchmark_group("solve_top");
    group.sample_size(10);
    for r in RADII {
        let f = solvable(&params, r);
        group.throughput(Throughput::Elements(f.coeffs().len() as u64));
        group.bench_with_input(BenchmarkId::new("split", r), &f, |b, f| {
            b.iter(|| split(f, &SplitWeight::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("d2", r), &f, |b, f| {
            b.iter(|| solve_top(f, &TopOptions::default()).unwrap())
        });
    }
    let params = triple();
    for r in [8i64, 16] {
        let f = solvable(&params, r);
        assert_eq!(f.window(), &Window::symmetric(&params, r));
        group.bench_with_input(BenchmarkId::new("d3", r), &f, |b, f| {
            b.iter(|| solve_top(f, &TopOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, apply_x, pi_product, one_dimensional, split_and_solve_top);
criterion_main!(benches);
