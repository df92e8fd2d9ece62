//! Compares the sequential and data-parallel execution modes of the two
//! expensive entry points: the dynamic-programming solver (candidate-state
//! transition construction) and the extreme-point oracle (per-tree flow
//! recovery). Both modes must return identical results; these benchmarks
//! measure what the parallel feature buys at representative sizes.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gridflow::{
    enumerate_extreme_points_with, solve_with, ArcId, CostSpec, ExecMode, GridSpec, OracleBudget,
    SolveOptions, Vertex,
};

/// A single-source instance large enough that the candidate state graph has
/// real work per stage: one source in the top row feeding sinks spread along
/// the bottom row, with concave (fixed-charge and power) arc costs.
fn solver_instance() -> GridSpec {
    let cols = 8;
    let mut supplies = vec![vec![0i64; cols], vec![0i64; cols]];
    supplies[0][0] = 12;
    supplies[1][1] = -3;
    supplies[1][3] = -4;
    supplies[1][5] = -2;
    supplies[1][7] = -3;
    let mut builder = GridSpec::builder(2, cols).supplies(supplies);
    for t in 0..cols - 1 {
        builder = builder
            .cost(
                ArcId::Forward(Vertex::new(0, t)),
                CostSpec::fixed_charge(3.0, 0.5),
            )
            .cost(ArcId::Forward(Vertex::new(1, t)), CostSpec::linear(0.25));
    }
    for t in 0..cols {
        builder = builder.cost(ArcId::Down(Vertex::new(0, t)), CostSpec::power(2.0, 0.5));
    }
    builder.build().expect("benchmark instance is well formed")
}

/// A small instance inside the oracle's default vertex budget, with enough
/// spanning trees that per-tree recovery dominates.
fn oracle_instance() -> GridSpec {
    let cols = 6;
    let mut supplies = vec![vec![0i64; cols], vec![0i64; cols]];
    supplies[0][0] = 5;
    supplies[0][2] = 2;
    supplies[1][4] = -4;
    supplies[1][5] = -3;
    GridSpec::builder(2, cols)
        .supplies(supplies)
        .build()
        .expect("benchmark instance is well formed")
}

fn bench_solver(c: &mut Criterion) {
    let grid = solver_instance();
    let mut group = c.benchmark_group("solve");
    for (label, exec) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        let opts = SolveOptions {
            exec,
            ..SolveOptions::default()
        };
        group.bench_function(label, |b| {
            b.iter(|| solve_with(black_box(&grid), &opts).expect("instance solves"))
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let grid = oracle_instance();
    let mut group = c.benchmark_group("oracle");
    for (label, exec) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        group.bench_function(label, |b| {
            b.iter(|| {
                enumerate_extreme_points_with(black_box(&grid), OracleBudget::default(), exec)
                    .expect("instance is within budget")
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solver, bench_oracle);
criterion_main!(benches);
