//! Brute-force enumeration of extreme-point flows.
//!
//! A feasible flow is an extreme point of the flow polytope exactly when its
//! *free* arcs — arcs strictly between zero and capacity — contain no
//! undirected cycle. Every extreme point therefore extends to a spanning
//! tree of the grid (free arcs into the tree, every nontree arc pinned at
//! zero or at its finite capacity), and conversely the unique flow balancing
//! any such (tree, bounds) choice is extreme whenever it is feasible.
//!
//! The oracle enumerates all spanning trees of the grid graph, then for each
//! tree all bound assignments of its finite-capacity nontree arcs, solves
//! the tree by leaf peeling, keeps the feasible results, and deduplicates.
//! Exponential, but exact — it exists to certify the fast solver on small
//! instances, so it favors obvious correctness over scale and refuses
//! instances beyond an explicit budget instead of grinding.

use std::collections::BTreeSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{arc_count, arc_index, check_flow, Capacity, FlowAssignment, GridSpec};
use crate::ExecMode;

/// Hard limits for the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Maximum number of grid vertices.
    pub max_vertices: usize,
    /// Maximum total count of (spanning tree, bound assignment) pairs.
    pub max_combinations: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_vertices: 20,
            max_combinations: 1_000_000,
        }
    }
}

#[derive(Clone)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the two classes; false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Static view of one grid used throughout the enumeration: arcs in dense
/// index order with endpoints flattened to vertex numbers.
struct Ctx {
    rows: usize,
    cols: usize,
    nodes: usize,
    /// Arc endpoints by dense arc index.
    ends: Vec<(usize, usize)>,
    caps: Vec<Capacity>,
    supplies: Vec<i64>,
    /// Bit per dense arc index with a finite capacity.
    finite_mask: u64,
}

impl Ctx {
    fn new(grid: &GridSpec) -> Self {
        let (rows, cols) = (grid.rows(), grid.cols());
        let node = |v: crate::grid::Vertex| v.row * cols + v.col;
        let m = arc_count(rows, cols);
        let mut ends = vec![(0, 0); m];
        let mut caps = vec![Capacity::Unbounded; m];
        let mut finite_mask = 0u64;
        for arc in grid.arcs() {
            let idx = arc_index(rows, cols, arc).expect("arc of own grid");
            ends[idx] = (node(arc.tail()), node(arc.head()));
            caps[idx] = grid.capacity(arc);
            if caps[idx].finite().is_some() {
                finite_mask |= 1 << idx;
            }
        }
        let supplies = grid.vertices().map(|v| grid.supply(v)).collect();
        Ctx {
            rows,
            cols,
            nodes: rows * cols,
            ends,
            caps,
            supplies,
            finite_mask,
        }
    }

    /// All feasible extreme points reachable from one spanning tree: every
    /// assignment of nontree finite-capacity arcs to {0, capacity}, solved
    /// for the unique balancing tree flow.
    fn flows_for_tree(&self, tree: u64) -> BTreeSet<FlowAssignment> {
        let mut found = BTreeSet::new();
        let peel = self.peel_order(tree);
        let loose: Vec<usize> = (0..self.ends.len())
            .filter(|&i| self.finite_mask & !tree & (1 << i) != 0)
            .collect();
        let mut flow = vec![0i64; self.ends.len()];
        let mut need = vec![0i64; self.nodes];
        for subset in 0u64..(1u64 << loose.len()) {
            flow.iter_mut().for_each(|x| *x = 0);
            need.copy_from_slice(&self.supplies);
            for (j, &a) in loose.iter().enumerate() {
                if subset >> j & 1 == 1 {
                    let u = self.caps[a].finite().expect("loose arcs are finite");
                    let (tail, head) = self.ends[a];
                    flow[a] = u;
                    need[tail] -= u;
                    need[head] += u;
                }
            }
            let mut ok = true;
            for &(v, a) in &peel {
                let (tail, head) = self.ends[a];
                let f = if tail == v { need[v] } else { -need[v] };
                if f < 0 || !self.caps[a].admits(f) {
                    ok = false;
                    break;
                }
                flow[a] = f;
                let other = if tail == v { head } else { tail };
                if tail == v {
                    need[other] += f;
                } else {
                    need[other] -= f;
                }
                need[v] = 0;
            }
            if ok {
                debug_assert!(need.iter().all(|&r| r == 0), "supplies must balance");
                found.insert(FlowAssignment::from_dense(self.rows, self.cols, flow.clone()));
            }
        }
        found
    }

    /// Leaf-peeling schedule for a spanning tree: at each step one vertex
    /// with a single unresolved tree arc, paired with that arc.
    fn peel_order(&self, tree: u64) -> Vec<(usize, usize)> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.nodes];
        for a in 0..self.ends.len() {
            if tree >> a & 1 == 1 {
                let (u, v) = self.ends[a];
                adj[u].push(a);
                adj[v].push(a);
            }
        }
        let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut resolved = vec![false; self.ends.len()];
        let mut stack: Vec<usize> = (0..self.nodes).filter(|&v| degree[v] == 1).collect();
        let mut order = Vec::with_capacity(self.nodes.saturating_sub(1));
        while let Some(v) = stack.pop() {
            let Some(&a) = adj[v].iter().find(|&&a| !resolved[a]) else {
                continue;
            };
            resolved[a] = true;
            order.push((v, a));
            let (t, h) = self.ends[a];
            let other = if t == v { h } else { t };
            degree[other] -= 1;
            if degree[other] == 1 {
                stack.push(other);
            }
        }
        debug_assert_eq!(order.len(), self.nodes - 1, "tree must span");
        order
    }
}

/// Branch-and-bound spanning tree enumeration with an up-front budget on the
/// total number of (tree, bound assignment) pairs the solve phase would cost.
struct TreeEnum<'c> {
    ctx: &'c Ctx,
    trees: Vec<u64>,
    combinations: u128,
    max_combinations: u64,
}

impl TreeEnum<'_> {
    fn run(ctx: &Ctx, max_combinations: u64) -> Result<Vec<u64>> {
        let mut te = TreeEnum {
            ctx,
            trees: Vec::new(),
            combinations: 0,
            max_combinations,
        };
        let mut dsu = Dsu::new(ctx.nodes);
        te.recurse(0, &mut dsu, 0, 0)?;
        Ok(te.trees)
    }

    fn recurse(&mut self, idx: usize, dsu: &mut Dsu, mask: u64, picked: usize) -> Result<()> {
        let target = self.ctx.nodes - 1;
        if picked == target {
            return self.record(mask);
        }
        let m = self.ctx.ends.len();
        if idx == m || picked + (m - idx) < target {
            return Ok(());
        }
        let (u, v) = self.ctx.ends[idx];
        if dsu.find(u) != dsu.find(v) {
            let mut child = dsu.clone();
            child.union(u, v);
            self.recurse(idx + 1, &mut child, mask | (1 << idx), picked + 1)?;
        }
        if self.still_spanning(idx + 1, mask) {
            self.recurse(idx + 1, dsu, mask, picked)?;
        }
        Ok(())
    }

    /// Whether the picked arcs plus everything not yet decided still connect
    /// all vertices; prunes hopeless exclusion branches.
    fn still_spanning(&self, from: usize, mask: u64) -> bool {
        let mut dsu = Dsu::new(self.ctx.nodes);
        let mut components = self.ctx.nodes;
        for (i, &(u, v)) in self.ctx.ends.iter().enumerate() {
            if (i >= from || mask >> i & 1 == 1) && dsu.union(u, v) {
                components -= 1;
            }
        }
        components == 1
    }

    fn record(&mut self, mask: u64) -> Result<()> {
        let loose = (self.ctx.finite_mask & !mask).count_ones();
        self.combinations += 1u128 << loose;
        if self.combinations > u128::from(self.max_combinations) {
            return Err(Error::TooLarge {
                found: u64::try_from(self.combinations).unwrap_or(u64::MAX),
                budget: self.max_combinations,
            });
        }
        self.trees.push(mask);
        Ok(())
    }
}

/// Enumerates every extreme point of the instance's flow polytope under the
/// default [`OracleBudget`] and execution mode.
///
/// The result is sorted (lexicographically by dense arc values), complete,
/// and duplicate-free. Instances over budget return
/// [`TooLarge`](Error::TooLarge) rather than starting an open-ended search.
pub fn enumerate_extreme_points(grid: &GridSpec) -> Result<Vec<FlowAssignment>> {
    enumerate_extreme_points_with(grid, OracleBudget::default(), ExecMode::default())
}

/// [`enumerate_extreme_points`] with an explicit budget and execution mode.
/// Both modes return identical results.
pub fn enumerate_extreme_points_with(
    grid: &GridSpec,
    budget: OracleBudget,
    exec: ExecMode,
) -> Result<Vec<FlowAssignment>> {
    let nodes = grid.rows() * grid.cols();
    if nodes > budget.max_vertices {
        return Err(Error::TooLarge {
            found: nodes as u64,
            budget: budget.max_vertices as u64,
        });
    }
    // Trees are u64 bitmasks over dense arc indices; more than 64 arcs can
    // only happen through a raised vertex budget and is out of scope.
    let arcs = arc_count(grid.rows(), grid.cols());
    if arcs > 64 {
        return Err(Error::TooLarge {
            found: arcs as u64,
            budget: 64,
        });
    }
    let ctx = Ctx::new(grid);
    let trees = TreeEnum::run(&ctx, budget.max_combinations)?;

    #[cfg(feature = "parallel")]
    let merged = if exec.is_parallel() {
        trees
            .par_iter()
            .map(|&tree| ctx.flows_for_tree(tree))
            .reduce(BTreeSet::new, |mut a, b| {
                a.extend(b);
                a
            })
    } else {
        merge_sequential(&ctx, &trees)
    };
    #[cfg(not(feature = "parallel"))]
    let merged = {
        let _ = exec;
        merge_sequential(&ctx, &trees)
    };

    Ok(merged.into_iter().collect())
}

fn merge_sequential(ctx: &Ctx, trees: &[u64]) -> BTreeSet<FlowAssignment> {
    let mut all = BTreeSet::new();
    for &tree in trees {
        all.extend(ctx.flows_for_tree(tree));
    }
    all
}

/// Whether `flow` is a feasible extreme point: it satisfies all constraints
/// and its free arcs (strictly between zero and capacity) are cycle-free as
/// undirected edges.
pub fn is_extreme_point(grid: &GridSpec, flow: &FlowAssignment) -> bool {
    if !check_flow(grid, flow).is_ok() {
        return false;
    }
    let cols = grid.cols();
    let node = |v: crate::grid::Vertex| v.row * cols + v.col;
    let mut dsu = Dsu::new(grid.rows() * cols);
    for (arc, x) in flow.nonzero() {
        let free = match grid.capacity(arc) {
            Capacity::Finite(u) => x < u,
            Capacity::Unbounded => true,
        };
        if free && !dsu.union(node(arc.tail()), node(arc.head())) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grid::{evaluate_cost, ArcId, GridSpec, Vertex};

    #[test]
    fn uncapacitated_two_by_two_has_exactly_two_extreme_points() {
        let grid = fixtures::i1();
        let points = enumerate_extreme_points(&grid).unwrap();
        assert_eq!(points, vec![fixtures::i1_point_b(), fixtures::i1_point_a()]);
    }

    #[test]
    fn both_extreme_points_cost_eight_under_unit_linear_costs() {
        let grid = fixtures::i1_linear_unit_costs();
        for p in enumerate_extreme_points(&grid).unwrap() {
            assert_eq!(evaluate_cost(&grid, &p).unwrap(), 8.0);
        }
    }

    #[test]
    fn a_binding_capacity_swaps_one_extreme_point() {
        // Same grid, downward arc in column 1 capped at 4: the all-down
        // point is cut off and the cap introduces a new corner at flow 4.
        let grid = GridSpec::builder(2, 2)
            .supplies(vec![vec![5, 0], vec![-2, -3]])
            .capacity(ArcId::Down(Vertex::new(0, 0)), 4)
            .build()
            .unwrap();
        let points = enumerate_extreme_points(&grid).unwrap();
        let mut capped = crate::grid::FlowAssignment::zeros(2, 2);
        capped.set(ArcId::Forward(Vertex::new(0, 0)), 1);
        capped.set(ArcId::Down(Vertex::new(0, 0)), 4);
        capped.set(ArcId::Forward(Vertex::new(1, 0)), 2);
        capped.set(ArcId::Down(Vertex::new(0, 1)), 1);
        assert_eq!(points, vec![capped, fixtures::i1_point_a()]);
    }

    #[test]
    fn single_row_grid_has_one_extreme_point() {
        let grid = GridSpec::builder(1, 3)
            .supplies(vec![vec![3, -1, -2]])
            .build()
            .unwrap();
        let points = enumerate_extreme_points(&grid).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].get(ArcId::Forward(Vertex::new(0, 0))), 3);
        assert_eq!(points[0].get(ArcId::Forward(Vertex::new(0, 1))), 2);
    }

    #[test]
    fn infeasible_instance_yields_no_extreme_points() {
        let grid = GridSpec::builder(2, 2)
            .supplies(vec![vec![5, 0], vec![-2, -3]])
            .capacity(ArcId::Forward(Vertex::new(0, 0)), 1)
            .capacity(ArcId::Down(Vertex::new(0, 0)), 1)
            .build()
            .unwrap();
        assert_eq!(enumerate_extreme_points(&grid).unwrap(), vec![]);
    }

    #[test]
    fn all_results_are_feasible_extreme_points() {
        let grid = GridSpec::builder(3, 3)
            .supplies(vec![vec![4, 0, 1], vec![0, -2, 0], vec![-1, 0, -2]])
            .capacity(ArcId::Down(Vertex::new(0, 0)), 3)
            .capacity(ArcId::Forward(Vertex::new(1, 0)), 2)
            .build()
            .unwrap();
        let points = enumerate_extreme_points(&grid).unwrap();
        assert!(!points.is_empty());
        for p in &points {
            assert!(is_extreme_point(&grid, p));
        }
        // Sorted and duplicate-free by construction.
        let mut sorted = points.clone();
        sorted.dedup();
        sorted.sort();
        assert_eq!(points, sorted);
    }

    #[test]
    fn vertex_budget_refuses_large_grids() {
        let grid = GridSpec::builder(5, 5)
            .supplies(vec![
                vec![1, 0, 0, 0, 0],
                vec![0; 5],
                vec![0; 5],
                vec![0; 5],
                vec![0, 0, 0, 0, -1],
            ])
            .build()
            .unwrap();
        let err = enumerate_extreme_points(&grid).unwrap_err();
        assert!(matches!(
            err,
            Error::TooLarge {
                found: 25,
                budget: 20
            }
        ));
    }

    #[test]
    fn combination_budget_stops_enumeration_early() {
        let grid = fixtures::i1();
        let tight = OracleBudget {
            max_vertices: 20,
            max_combinations: 2,
        };
        let err = enumerate_extreme_points_with(&grid, tight, ExecMode::Sequential).unwrap_err();
        assert!(matches!(err, Error::TooLarge { budget: 2, .. }));
    }

    #[test]
    fn sequential_and_parallel_modes_agree() {
        let grid = GridSpec::builder(3, 3)
            .supplies(vec![vec![4, 0, 1], vec![0, -2, 0], vec![-1, 0, -2]])
            .capacity(ArcId::Down(Vertex::new(1, 1)), 2)
            .build()
            .unwrap();
        let budget = OracleBudget::default();
        let seq = enumerate_extreme_points_with(&grid, budget, ExecMode::Sequential).unwrap();
        let par = enumerate_extreme_points_with(&grid, budget, ExecMode::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn is_extreme_point_rejects_free_cycles() {
        // Push one unit around the 2x2 face on top of extreme point A:
        // still feasible, but all four arcs become free, forming a cycle.
        let grid = fixtures::i1();
        let mut f = fixtures::i1_point_a();
        assert!(is_extreme_point(&grid, &f));
        f.set(ArcId::Down(Vertex::new(0, 0)), 3);
        f.set(ArcId::Forward(Vertex::new(0, 0)), 2);
        f.set(ArcId::Down(Vertex::new(0, 1)), 2);
        f.set(ArcId::Forward(Vertex::new(1, 0)), 1);
        assert!(check_flow(&grid, &f).is_ok());
        assert!(!is_extreme_point(&grid, &f));
    }

    #[test]
    fn spanning_tree_counts_match_known_grid_values() {
        for (rows, cols, count) in [(2, 2, 4), (2, 3, 15), (2, 4, 56), (3, 3, 192)] {
            let grid = GridSpec::builder(rows, cols)
                .supplies(vec![vec![0; cols]; rows])
                .build()
                .unwrap();
            let ctx = Ctx::new(&grid);
            let trees = TreeEnum::run(&ctx, u64::MAX).unwrap();
            assert_eq!(trees.len(), count, "{rows}x{cols}");
        }
    }
}
