use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pmech_core::*;

fn bench_dynamics(c: &mut Criterion) {
    let grid = Grid2::square(7.0, 64).unwrap();
    let osc = OscillatorParams::harmonic(1.0, 1.0).unwrap();
    let f0 = PhaseField::gaussian(grid, 1.5, 0.0, 1.0);

    c.bench_function("cubic rhs 64x64", |b| {
        b.iter(|| cubic_rhs_field(UnitTag::Elliptic, &osc, black_box(&f0), 1.0))
    });
    c.bench_function("evolve 16 RK4 steps 64x64", |b| {
        b.iter(|| {
            evolve_cubic(UnitTag::Elliptic, &osc, black_box(&f0), 1.0, 16.0 * 1e-3, 1e-3).unwrap()
        })
    });
}

criterion_group!(benches, bench_dynamics);
criterion_main!(benches);
