use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use triosc::dynamics::{
    integrate_direct, integrate_naive_decoupled, OscillatorSystem, TimeProfile,
};
use triosc::euler::{adjoint_action, euler_fit, FitConfig};
use triosc::linalg3::{jacobi_default, SymMat3, Vec3};
use triosc::mij::mij_printed;
use triosc::sampling::symmetric_batch;
use triosc::spectrum::{eigenvalues_printed, eigenvalues_robust};
use triosc::EulerAngles;

fn spectrum(c: &mut Criterion) {
    let batch = symmetric_batch(1, 1024, 1e3);
    c.bench_function("jacobi_1024", |b| {
        b.iter(|| {
            batch
                .iter()
                .map(|g| jacobi_default(black_box(g)).unwrap().eigenvalues[0])
                .sum::<f64>()
        })
    });
    c.bench_function("robust_1024", |b| {
        b.iter(|| {
            batch
                .iter()
                .map(|g| eigenvalues_robust(black_box(g)).omega_sq[0])
                .sum::<f64>()
        })
    });
    c.bench_function("printed_1024", |b| {
        b.iter(|| {
            batch
                .iter()
                .map(|g| eigenvalues_printed(black_box(g)).omega_sq[0])
                .sum::<f64>()
        })
    });
}

fn rotations(c: &mut Criterion) {
    let g = SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0);
    let a = EulerAngles::new(0.3, 0.4, 0.5);
    c.bench_function("adjoint_action", |b| {
        b.iter(|| adjoint_action(black_box(&a)))
    });
    c.bench_function("mij_printed", |b| {
        b.iter(|| mij_printed(black_box(&g), black_box(&a)))
    });
    c.bench_function("euler_fit_default", |b| {
        b.iter(|| euler_fit(black_box(&g), &FitConfig::default()).off_norm)
    });
}

fn dynamics(c: &mut Criterion) {
    let g = SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0);
    let constant = OscillatorSystem::from_gamma(&g, 1.0, 1e-3).unwrap();
    let varying = OscillatorSystem {
        couplings: [
            TimeProfile::Sinusoid {
                offset: 2.0,
                amplitude: 1.0,
                omega: 3.0,
                phase: 0.0,
            },
            TimeProfile::Constant(4.0),
            TimeProfile::Constant(6.0),
        ],
        ..constant.clone()
    };
    let (x0, p0) = (Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO);
    c.bench_function("rk4_1000_steps", |b| {
        b.iter(|| {
            integrate_direct(black_box(&constant), x0, p0)
                .unwrap()
                .steps
        })
    });
    c.bench_function("naive_decoupled_1000_steps", |b| {
        b.iter(|| {
            integrate_naive_decoupled(black_box(&varying), x0, p0)
                .unwrap()
                .max_discrepancy
        })
    });
}

criterion_group!(benches, spectrum, rotations, dynamics);
criterion_main!(benches);
