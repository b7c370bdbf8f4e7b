use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qdot_bench::{gaussian, lab_grid, params, short_pulse};
use qdot_core::propagation::SplitOperator1D;
use qdot_core::stationary::{solve_relative_eigenstates, HartreeSolver};
use qdot_core::{propagate_exact_2d, ChannelSet, PropagatorConfig, SplitScheme};

fn split_step(c: &mut Criterion) {
    let grid = lab_grid();
    let p = params();
    let v: Vec<f64> = grid.points().iter().map(|&x| p.confinement(x)).collect();
    for (name, scheme) in [("strang", SplitScheme::Strang), ("yoshida4", SplitScheme::Yoshida4)] {
        let split = SplitOperator1D::new(grid, 1.0, 0.02, scheme);
        let mut psi = gaussian(&grid);
        c.bench_function(&format!("split_step_1d_{name}"), |b| {
            b.iter(|| split.step(black_box(&mut psi), 0.0, |_, _| v.clone()))
        });
    }
}

fn hartree(c: &mut Criterion) {
    let grid = lab_grid();
    let solver = HartreeSolver::new(&grid, &params());
    let density: Vec<f64> = gaussian(&grid).iter().map(|c| 2.0 * c.norm_sqr()).collect();
    c.bench_function("hartree_fft_256", |b| b.iter(|| solver.potential(black_box(&density))));
}

fn relative_eigensolve(c: &mut Criterion) {
    let pair = lab_grid().pair_grid();
    let p = params();
    let mut group = c.benchmark_group("relative_eigensolve");
    group.sample_size(10);
    group.bench_function("pair_grid_512", |b| {
        b.iter(|| solve_relative_eigenstates(black_box(&p), &pair, 3).unwrap())
    });
    group.finish();
}

fn pair_grid_propagation(c: &mut Criterion) {
    let grid = lab_grid();
    let channels = ChannelSet::ladder(&params(), &grid, 1, 1).unwrap();
    let pulse = short_pulse(5);
    let cfg = PropagatorConfig {
        t_max: pulse.tau + 0.1,
        record_stride: 10,
        ..PropagatorConfig::for_pulse(&pulse)
    };
    let mut group = c.benchmark_group("exact_2d");
    group.sample_size(10);
    group.bench_function("ten_steps_256x256", |b| {
        b.iter(|| propagate_exact_2d(&channels, &pulse, black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, split_step, hartree, relative_eigensolve, pair_grid_propagation);
criterion_main!(benches);
