use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plasmon_bench::{cold_model, reference_inputs, reference_solver, POINTS};
use plasmon_core::gate::{evaluate_gate_point, sweep_map, Range, SweepGrid};
use plasmon_core::ribbon::{solve_modes, RibbonGrid};
use plasmon_core::scattering::{fidelity, GaussianPulse, ScatterParams};
use std::hint::black_box;

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_modes");
    group.sample_size(20);
    for n in [50, POINTS, 200] {
        let grid = RibbonGrid::solid(n, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, g| {
            b.iter(|| solve_modes(black_box(g), 1.0, 3).unwrap())
        });
    }
    group.finish();
}

fn dispersion(c: &mut Criterion) {
    c.bench_function("local_expansion_cold", |b| {
        b.iter(|| reference_solver().local_expansion(2, black_box(0.05)).unwrap())
    });
    let warm = reference_solver();
    warm.local_expansion(2, 0.05).unwrap();
    c.bench_function("local_expansion_cached", |b| b.iter(|| warm.local_expansion(2, black_box(0.05)).unwrap()));
}

fn scattering(c: &mut Criterion) {
    let le = reference_solver().local_expansion(2, 0.05).unwrap();
    let sp = ScatterParams::from_expansion(&le, 0.99).unwrap();
    let pulse = GaussianPulse::for_ribbon(20.0, 1.0, 0.9).unwrap();
    c.bench_function("fidelity", |b| b.iter(|| fidelity(black_box(&pulse), &sp).unwrap()));
}

fn gate(c: &mut Criterion) {
    let model = cold_model();
    evaluate_gate_point(&model, reference_inputs()).unwrap();
    c.bench_function("gate_point_cached", |b| {
        b.iter(|| evaluate_gate_point(&model, black_box(reference_inputs())).unwrap())
    });
    let grid = SweepGrid {
        widths: Range::new(10.0, 40.0, 3.0).unwrap(),
        energies: Range::new(0.05, 0.2, 0.015).unwrap(),
        fixed: reference_inputs(),
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("11x11", |b| b.iter(|| sweep_map(&model, black_box(&grid)).unwrap()));
    group.finish();
}

criterion_group!(benches, eigen, dispersion, scattering, gate);
criterion_main!(benches);
