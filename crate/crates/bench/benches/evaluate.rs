use criterion::{black_box, criterion_group, criterion_main, Criterion};
use utmq_core::solver::evaluate;
use utmq_core::*;

fn ch_plus_data() -> ProblemData {
    ProblemData::new(
        Dispersion::new(Family::ChPlus, 1.0, 1.0).unwrap(),
        HalfLineFunction::exp_decay(1.0, 1.0).unwrap(),
        TimeSignal::sin(1.0, 1.0),
        TimeSignal::zero(),
    )
}

fn point_values(c: &mut Criterion) {
    let data = ch_plus_data();
    let bi = ProblemData::new(
        Dispersion::biharmonic(),
        HalfLineFunction::exp_decay(1.0, 1.0).unwrap(),
        TimeSignal::constant(1.0),
        TimeSignal::zero(),
    );
    let opts = SolverOptions::default();
    c.bench_function("ch_plus value at (1, 0.5)", |b| {
        b.iter(|| evaluate(&data, black_box(1.0), black_box(0.5), DerivOrder::VALUE, &opts, None).unwrap())
    });
    c.bench_function("ch_plus boundary form at (4, 0.1)", |b| {
        b.iter(|| evaluate(&data, black_box(4.0), black_box(0.1), DerivOrder::VALUE, &opts.boundary(), None).unwrap())
    });
    c.bench_function("biharmonic value at (1, 0.5)", |b| {
        b.iter(|| evaluate(&bi, black_box(1.0), black_box(0.5), DerivOrder::VALUE, &opts, None).unwrap())
    });
}

fn fd_run(c: &mut Criterion) {
    let data = ch_plus_data();
    let mut g = c.benchmark_group("fd");
    g.sample_size(10);
    g.bench_function("ch_plus nx=2048 to t=0.1", |b| b.iter(|| fd_solve(&data, &FdGrid::new(20.0, 2048, 1e-3, 0.1)).unwrap()));
    g.finish();
}

criterion_group!(benches, point_values, fd_run);
criterion_main!(benches);
