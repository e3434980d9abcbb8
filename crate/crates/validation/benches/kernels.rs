use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use oqs_adiabatic::adiabatic_conditions::{xi_max, ConditionOptions};
use oqs_adiabatic::evolution::{solve_master, SolverOptions};
use oqs_adiabatic::hilbert_schmidt::pauli_basis;
use oqs_adiabatic::models::{deutsch_initial_state, deutsch_model};
use oqs_adiabatic::quadrature::linspace;
use oqs_adiabatic::spectral::{decompose, track_spectrum, DecomposeOptions, TrackOptions};
use oqs_adiabatic_validation::{deutsch, deutsch_path};

fn spectral(c: &mut Criterion) {
    let basis = pauli_basis(1);
    let model = deutsch_model(&deutsch(0.1, 20.0)).unwrap();
    let l = model.superoperator(7.0, &basis).unwrap();
    c.bench_function("decompose_4x4", |b| {
        b.iter(|| decompose(black_box(&l), DecomposeOptions::default()).unwrap())
    });
    let grid = linspace(0.0, 1.0, 401);
    c.bench_function("track_spectrum_401", |b| {
        b.iter(|| {
            track_spectrum(&model, &basis, black_box(&grid), TrackOptions::default()).unwrap()
        })
    });
}

fn master(c: &mut Criterion) {
    let basis = pauli_basis(1);
    let model = deutsch_model(&deutsch(0.1, 30.0)).unwrap();
    let rho0 = deutsch_initial_state();
    c.bench_function("solve_master_tau30", |b| {
        b.iter(|| {
            solve_master(
                &model,
                &basis,
                &rho0,
                &[0.0, 30.0],
                SolverOptions::default(),
            )
            .unwrap()
        })
    });
}

fn conditions(c: &mut Criterion) {
    let traj = deutsch_path(401);
    let opts = ConditionOptions::default();
    c.bench_function("xi_max_401", |b| {
        b.iter(|| xi_max(&traj, black_box(30.0), &opts).unwrap())
    });
    let with_oracle = ConditionOptions {
        with_oracle: true,
        ..Default::default()
    };
    c.bench_function("xi_max_oracle_401", |b| {
        b.iter(|| xi_max(&traj, black_box(30.0), &with_oracle).unwrap())
    });
}

criterion_group!(benches, spectral, master, conditions);
criterion_main!(benches);
