use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ro_ac0::fourier::{level_profile_recursive, level_profile_truncated, wht_bruteforce};
use ro_ac0::{OrderedBp, Rational};
use ro_ac0_bench::{bits, random_formula, tribes_near};

fn wht(c: &mut Criterion) {
    let mut g = c.benchmark_group("wht_bruteforce");
    g.sample_size(10);
    for n in [8, 12, 16, 20] {
        let f = random_formula(n);
        g.throughput(Throughput::Elements(1 << n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| wht_bruteforce(black_box(f)).unwrap())
        });
    }
    g.finish();
}

fn recursion(c: &mut Criterion) {
    let mut g = c.benchmark_group("level_profile");
    g.sample_size(10);
    for n in [64, 256, 1024] {
        let f = random_formula(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("f64", n), &f, |b, f| {
            b.iter(|| level_profile_recursive::<f64>(black_box(f)).unwrap())
        });
    }
    for n in [16, 64] {
        let f = random_formula(n);
        g.bench_with_input(BenchmarkId::new("rational", n), &f, |b, f| {
            b.iter(|| level_profile_recursive::<Rational>(black_box(f)).unwrap())
        });
    }
    for n in [10_000, 100_000] {
        let f = random_formula(n);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("truncated_32", n), &f, |b, f| {
            b.iter(|| level_profile_truncated::<f64>(black_box(f), 32).unwrap())
        });
    }
    g.finish();
}

fn branching_program(c: &mut Criterion) {
    let mut g = c.benchmark_group("bp");
    for n in [64, 1024] {
        let f = tribes_near(n);
        g.bench_with_input(BenchmarkId::new("convert", n), &f, |b, f| {
            b.iter(|| OrderedBp::from_circuit(black_box(f)))
        });
        let bp = OrderedBp::from_circuit(&f);
        let x = bits(0x9e37_79b9_7f4a_7c15, 64)
            .into_iter()
            .cycle()
            .take(f.n())
            .collect::<Vec<_>>();
        g.bench_with_input(BenchmarkId::new("accepts", n), &x, |b, x| {
            b.iter(|| bp.accepts(black_box(x)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, wht, recursion, branching_program);
criterion_main!(benches);
