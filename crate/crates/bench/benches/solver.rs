use choquard::kernels::{convolve, fractional_laplacian};
use choquard::solver::{apply_quadratic_operator, ground_state, SolverConfig};
use choquard::variational::{energy, Mode};
use choquard::{Field, KernelMethod, QuadratureSpec};
use choquard_bench::{green_table, problem, window};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bump(radius: i64) -> Field {
    Field::from_fn(window(radius), |c| (-0.5 * c.iter().map(|x| (x * x) as f64).sum::<f64>()).exp())
}

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("green_table");
    for method in [KernelMethod::BesselProduct, KernelMethod::TorusSpectral] {
        g.bench_function(BenchmarkId::new(method.to_string(), 16), |b| {
            b.iter(|| green_table(black_box(16), method))
        });
    }
    g.finish();

    let table = green_table(16, KernelMethod::BesselProduct);
    let f = bump(16);
    c.bench_function("convolve_r16", |b| b.iter(|| convolve(&table, black_box(&f), false)));
    c.bench_function("fractional_laplacian_r16", |b| {
        b.iter(|| fractional_laplacian(1.0, black_box(&f), &QuadratureSpec::default()))
    });
}

fn variational(c: &mut Criterion) {
    let prob = problem(16, Mode::Full { lambda: 100.0 });
    let u = bump(16);
    c.bench_function("quadratic_operator_r16", |b| b.iter(|| apply_quadratic_operator(black_box(&u), &prob)));
    c.bench_function("energy_r16", |b| b.iter(|| energy(black_box(&u), &prob)));
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("ground_state");
    g.sample_size(10);
    for (name, mode) in [("full_lambda_100", Mode::Full { lambda: 100.0 }), ("dirichlet", Mode::Dirichlet)] {
        let prob = problem(16, mode);
        let cfg = SolverConfig {
            restarts: 0,
            ..SolverConfig::default()
        };
        g.bench_function(name, |b| b.iter(|| ground_state(&prob, &cfg)));
    }
    g.finish();
}

criterion_group!(benches, kernels, variational, solver);
criterion_main!(benches);
