//! Exact minimum concave-cost flow on two-dimensional grids.
//!
//! The network is an `L x T` grid of vertices. Every vertex `(l, t)` has two
//! potential outgoing arcs: a *forward* arc to `(l, t+1)` and a *downward* arc
//! to `(l+1, t)`. Each vertex carries an integer supply (positive), demand
//! (negative), or zero; each arc carries an optional integer capacity and a
//! concave cost function evaluated at integer flow values. The problem is to
//! route all supply to the demands at minimum total cost.
//!
//! Concave costs make this NP-hard in general, but an optimal solution always
//! sits at an extreme point of the flow polytope, and on a grid the flow an
//! extreme point can place on a forward arc is confined to a small set of
//! values built from partial sums of the supplies and signed combinations of
//! the finite capacities. For three instance families those candidate sets
//! are provably complete and polynomially small:
//!
//! * all terminals (sources and sinks) confined to two rows,
//! * two-row grids with finitely many distinct downward capacities,
//! * uncapacitated grids with all sources in one row.
//!
//! [`solve`] classifies the instance, generates candidate values per row,
//! builds a stage graph whose states are per-row forward flows through one
//! column boundary, and runs a shortest-path pass over it. Instances outside
//! the three families fall back to a budgeted brute force over spanning-tree
//! extreme points, which is also exposed directly as
//! [`enumerate_extreme_points`] and serves as the verification oracle for the
//! fast paths.
//!
//! The `reductions` module generates grid encodings of knapsack, partition,
//! and lot-sizing instances, useful both as test beds and as compact
//! witnesses of where the problem turns hard.
//!
//! Flows, supplies, and capacities are exact integers end to end; only costs
//! are floating point. All entry points are deterministic: reruns produce
//! identical flows, reports, and tie-breaks, with or without the `parallel`
//! feature.

pub mod candidates;
pub mod cost;
pub mod error;
pub mod extreme;
pub mod grid;
pub mod io;
mod maxflow;
pub mod reductions;
pub mod solver;
pub mod tree;

pub use candidates::{candidate_sets, CandidateValueSet};
pub use cost::CostSpec;
pub use error::{Error, Result};
pub use extreme::{
    enumerate_extreme_points, enumerate_extreme_points_with, is_extreme_point, OracleBudget,
};
pub use grid::{
    check_flow, check_instance_feasible, classify_instance, evaluate_cost, ArcId, Capacity,
    FlowAssignment, FlowCheck, GridBuilder, GridSpec, InstanceCase, Vertex, Violation,
};
pub use solver::{solve, solve_with, Solution, SolveMethod, SolveOptions, SolveStats};
pub use tree::{build_accessible_spanning_tree, CutSide, SpanningTreeSolution};

/// Selects between the sequential code path and the rayon data-parallel one.
///
/// `Parallel` only has an effect when the crate is built with the `parallel`
/// feature (the default); without it every entry point runs the sequential
/// fallback. Both paths produce identical results, so the choice is purely
/// about wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    #[cfg(feature = "parallel")]
    pub(crate) fn is_parallel(self) -> bool {
        self == ExecMode::Parallel
    }
}

/// Runs `f` inside a rayon thread pool of `threads` workers.
///
/// `threads = 0` uses rayon's default pool size. Without the `parallel`
/// feature the function simply runs `f` on the current thread.
pub fn run_with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads == 1 {
            return f();
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if threads > 0 {
            builder = builder.num_threads(threads);
        }
        match builder.build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
