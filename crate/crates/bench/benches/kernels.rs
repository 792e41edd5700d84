use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use momentgap_core::ar1_processes::simulate_pair;
use momentgap_core::experiment::registry_net;
use momentgap_core::moment_gap::{gap_report, CoupledArrays};
use momentgap_core::sampling::{make_stream, uniform01, StreamKey};
use momentgap_core::surrogate_models::{kriging_fit, net_lipschitz, spectral_norm, TrueFunction};
use momentgap_core::ui_diagnostics::{ic_compare, tail_functional};
use momentgap_core::Ar1Config;

fn key() -> StreamKey {
    StreamKey::new(1, 0, 0)
}

fn ar1(c: &mut Criterion) {
    let cfg = Ar1Config::default();
    let mut g = c.benchmark_group("simulate_pair");
    g.sample_size(10);
    for n in [100usize, 10_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| simulate_pair(&cfg, n, 10_000, key()).unwrap())
        });
    }
    g.finish();

    let s = simulate_pair(&cfg, 1000, 100_000, key()).unwrap();
    c.bench_function("gap_report/1e5", |b| {
        b.iter(|| gap_report(&[CoupledArrays::new(1000, &s.x, &s.y)], black_box(1.0)).unwrap())
    });
}

fn ui(c: &mut Criterion) {
    let mut s = make_stream(key());
    let x: Vec<f64> = (0..100_000).map(|_| -uniform01(&mut s).ln()).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let a_grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    c.bench_function("tail_functional/1e5", |b| {
        b.iter(|| tail_functional(std::slice::from_ref(&x), 1.0, &a_grid).unwrap())
    });
    c.bench_function("ic_compare/1e5", |b| {
        b.iter(|| ic_compare(&x, &y, &a_grid).unwrap())
    });
}

fn surrogates(c: &mut Criterion) {
    let mut g = c.benchmark_group("kriging_fit");
    for n in [20usize, 80] {
        let design: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
        let y: Vec<f64> = design
            .iter()
            .map(|x| TrueFunction::Sin2Pi.eval(x))
            .collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| kriging_fit(&design, &y, &[0.2], 1, 1e-10).unwrap())
        });
    }
    g.finish();

    let net = registry_net("relu_mlp").unwrap();
    let w = net.layers()[1].weights.clone();
    c.bench_function("spectral_norm/16x16", |b| {
        b.iter(|| spectral_norm(black_box(&w), 1e-10, 100_000))
    });
    c.bench_function("net_lipschitz/relu_mlp", |b| b.iter(|| net_lipschitz(&net)));
}

criterion_group!(benches, ar1, ui, surrogates);
criterion_main!(benches);
