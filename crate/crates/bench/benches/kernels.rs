use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use detpp::estimator::{select_tables, sphere_net, SubspaceModel};
use detpp::sampling::{sample_dpp, sample_dpp_oracle};
use detpp::{Density, DppDensity, Field, OrthonormalFamily, SeededRng, Spectrum};

fn density(p: usize, r: usize, seed: u64) -> DppDensity {
    let mut rng = SeededRng::new(seed);
    let phi = OrthonormalFamily::haar(p, r, Field::Complex, &mut rng).unwrap();
    let lambda = (0..r).map(|j| 0.95 - 0.6 * j as f64 / r as f64).collect();
    DppDensity::new(phi, Spectrum::new(lambda).unwrap()).unwrap()
}

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("density_table");
    for p in [6, 8, 10, 12] {
        let d = density(p, p / 2, 1);
        group.bench_with_input(BenchmarkId::from_parameter(p), &d, |b, d| {
            b.iter(|| black_box(d.table().unwrap()))
        });
    }
    group.finish();
}

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_1000");
    for p in [6, 10] {
        let d = density(p, p / 2, 2);
        group.bench_with_input(BenchmarkId::new("two_step", p), &d, |b, d| {
            let mut rng = SeededRng::new(3);
            b.iter(|| black_box(sample_dpp(d, 1000, &mut rng).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("oracle", p), &d, |b, d| {
            let mut rng = SeededRng::new(3);
            b.iter(|| black_box(sample_dpp_oracle(d, 1000, &mut rng).unwrap()))
        });
    }
    group.finish();
}

fn selection(c: &mut Criterion) {
    let truth = density(6, 3, 4);
    let samples = sample_dpp(&truth, 500, &mut SeededRng::new(5)).unwrap();
    let mut group = c.benchmark_group("select");
    for m in [10, 40] {
        let candidates: Vec<_> = (0..m)
            .map(|i| density(6, 3, 100 + i as u64).table().unwrap())
            .collect();
        let priors = vec![1.0 / m as f64; m];
        group.bench_with_input(BenchmarkId::from_parameter(m), &candidates, |b, t| {
            b.iter(|| black_box(select_tables(t, &priors, &samples).unwrap()))
        });
    }
    group.finish();
}

fn nets(c: &mut Criterion) {
    let model = SubspaceModel::full_space(0, 4, Field::Complex).unwrap();
    c.bench_function("sphere_net_p4_eta0.3", |b| {
        let mut rng = SeededRng::new(6);
        b.iter(|| black_box(sphere_net(&model, 0.3, 500, &mut rng).unwrap().len()))
    });
}

criterion_group!(benches, tables, samplers, selection, nets);
criterion_main!(benches);
