use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pmech_core::*;

fn bench_brackets(c: &mut Criterion) {
    let grid = Grid2::square(6.0, 32).unwrap();
    let params = CharacterParams::new(UnitTag::Elliptic, 0.5);
    let k1 = ObservableKernel::gaussian(grid.clone(), params, 0.4, 0.2, 0.7);
    let k2 = ObservableKernel::gaussian(grid, params, -0.3, -0.1, 0.9);

    c.bench_function("star_compose elliptic 32x32", |b| {
        b.iter(|| star_compose(UnitTag::Elliptic, black_box(&k1), black_box(&k2)).unwrap())
    });
    c.bench_function("bracket elliptic 32x32", |b| {
        b.iter(|| bracket(UnitTag::Elliptic, black_box(&k1), black_box(&k2)).unwrap())
    });
    c.bench_function("bracket parabolic 32x32", |b| {
        b.iter(|| bracket(UnitTag::Parabolic, black_box(&k1), black_box(&k2)).unwrap())
    });
}

fn bench_states(c: &mut Criterion) {
    let params = CharacterParams::new(UnitTag::Elliptic, 1.0);
    let v = StateFunction::gaussian(0.0, 2.0, 1.0, 1.0, 1.0);
    let l = state_kernel(&v, UnitTag::Elliptic, &params).unwrap();
    let g = GroupElement::new1(0.2, 0.5, -0.3);

    c.bench_function("state kernel quadrature eval", |b| {
        b.iter(|| black_box(&l).eval(black_box(&g)))
    });
    c.bench_function("position measurement (fast pairing)", |b| {
        b.iter(|| measure_position(&PositionObservable { c: 0.4, hbar: 1.0 }, black_box(&l)).unwrap())
    });
}

criterion_group!(benches, bench_brackets, bench_states);
criterion_main!(benches);
