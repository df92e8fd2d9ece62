//! Cross-validates the spanning-tree extreme-point oracle against a
//! from-scratch enumeration of every feasible integral flow.
//!
//! Nothing here reuses the library's tree machinery: feasible flows are
//! enumerated vertex by vertex from the balance equations, extremality is
//! re-derived as "the arcs strictly between their bounds form no undirected
//! cycle" with a local union-find, and costs are recomputed from closed
//! formulas. Agreement on every grid in the corpus (plus randomized grids)
//! is what licenses using the oracle as the reference elsewhere.

use std::collections::BTreeSet;

use proptest::prelude::*;

use gridflow::{
    enumerate_extreme_points, evaluate_cost, solve, ArcId, Capacity, CostSpec, FlowAssignment,
    GridSpec, SolveMethod, Vertex,
};

/// Enumerates every nonnegative integral flow meeting all balance equations
/// and capacities, by walking vertices in row-major order and splitting each
/// vertex's available units (supply plus inflow) between its outgoing arcs.
fn all_feasible_flows(grid: &GridSpec) -> Vec<FlowAssignment> {
    let rows = grid.rows();
    let cols = grid.cols();
    let mut out = Vec::new();
    let mut flow = FlowAssignment::for_grid(grid);

    fn cap_limit(grid: &GridSpec, arc: ArcId, want: i64) -> bool {
        match grid.capacity(arc) {
            Capacity::Finite(u) => want <= u,
            Capacity::Unbounded => true,
        }
    }

    fn visit(
        grid: &GridSpec,
        flow: &mut FlowAssignment,
        out: &mut Vec<FlowAssignment>,
        rows: usize,
        cols: usize,
        node: usize,
    ) {
        if node == rows * cols {
            out.push(flow.clone());
            return;
        }
        let v = Vertex::new(node / cols, node % cols);
        let mut avail = grid.supply(v);
        if v.row > 0 {
            avail += flow.get(ArcId::Down(Vertex::new(v.row - 1, v.col)));
        }
        if v.col > 0 {
            avail += flow.get(ArcId::Forward(Vertex::new(v.row, v.col - 1)));
        }
        if avail < 0 {
            return;
        }
        let fwd = ArcId::Forward(v);
        let down = ArcId::Down(v);
        match (grid.contains_arc(fwd), grid.contains_arc(down)) {
            (true, true) => {
                for f in 0..=avail {
                    let d = avail - f;
                    if cap_limit(grid, fwd, f) && cap_limit(grid, down, d) {
                        flow.set(fwd, f);
                        flow.set(down, d);
                        visit(grid, flow, out, rows, cols, node + 1);
                    }
                }
                flow.set(fwd, 0);
                flow.set(down, 0);
            }
            (true, false) => {
                if cap_limit(grid, fwd, avail) {
                    flow.set(fwd, avail);
                    visit(grid, flow, out, rows, cols, node + 1);
                    flow.set(fwd, 0);
                }
            }
            (false, true) => {
                if cap_limit(grid, down, avail) {
                    flow.set(down, avail);
                    visit(grid, flow, out, rows, cols, node + 1);
                    flow.set(down, 0);
                }
            }
            (false, false) => {
                if avail == 0 {
                    visit(grid, flow, out, rows, cols, node + 1);
                }
            }
        }
    }

    visit(grid, &mut flow, &mut out, rows, cols, 0);
    out
}

/// Re-derives extremality: arcs strictly inside their bounds (positive, and
/// below capacity when one is finite) must not close an undirected cycle.
fn has_acyclic_free_arcs(grid: &GridSpec, flow: &FlowAssignment) -> bool {
    let n = grid.rows() * grid.cols();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let node = |v: Vertex| v.row * grid.cols() + v.col;
    for arc in grid.arcs() {
        let x = flow.get(arc);
        let free = x > 0
            && match grid.capacity(arc) {
                Capacity::Finite(u) => x < u,
                Capacity::Unbounded => true,
            };
        if free {
            let (a, b) = (find(&mut parent, node(arc.tail())), find(&mut parent, node(arc.head())));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
    }
    true
}

/// Flow vector in canonical arc order, used as a set key.
fn key(flow: &FlowAssignment) -> Vec<i64> {
    flow.iter().map(|(_, x)| x).collect()
}

fn corpus() -> Vec<GridSpec> {
    vec![
        // One source, two sinks, uncapacitated.
        GridSpec::builder(2, 2)
            .supplies(vec![vec![5, 0], vec![-2, -3]])
            .build()
            .unwrap(),
        // Finite capacities, one of them binding.
        GridSpec::builder(2, 3)
            .supplies(vec![vec![4, 0, 0], vec![0, -1, -3]])
            .capacity(ArcId::Forward(Vertex::new(0, 0)), 2)
            .capacity(ArcId::Down(Vertex::new(0, 2)), 3)
            .build()
            .unwrap(),
        // Sources in two different rows.
        GridSpec::builder(3, 2)
            .supplies(vec![vec![2, 0], vec![1, 0], vec![0, -3]])
            .build()
            .unwrap(),
        // Zero everything: the only flow is the zero flow.
        GridSpec::builder(2, 2)
            .supplies(vec![vec![0, 0], vec![0, 0]])
            .build()
            .unwrap(),
        // Three rows and columns, mixed terminals, capacity in the middle.
        GridSpec::builder(3, 3)
            .supplies(vec![vec![3, 0, 1], vec![0, -1, 0], vec![0, 0, -3]])
            .capacity(ArcId::Down(Vertex::new(1, 1)), 1)
            .build()
            .unwrap(),
        // Sink before source in the row ordering.
        GridSpec::builder(2, 3)
            .supplies(vec![vec![0, 3, 0], vec![-1, 0, -2]])
            .build()
            .unwrap(),
    ]
}

#[test]
fn oracle_equals_exhaustively_filtered_flows_on_the_corpus() {
    for grid in corpus() {
        let expected: BTreeSet<Vec<i64>> = all_feasible_flows(&grid)
            .iter()
            .filter(|f| has_acyclic_free_arcs(&grid, f))
            .map(key)
            .collect();
        let oracle: BTreeSet<Vec<i64>> = enumerate_extreme_points(&grid)
            .unwrap()
            .iter()
            .map(key)
            .collect();
        assert_eq!(
            oracle, expected,
            "extreme-point mismatch on {}x{} grid",
            grid.rows(),
            grid.cols()
        );
    }
}

/// Closed-formula costs recomputed in this file, independent of `CostSpec`.
fn formula_cost(grid: &GridSpec, flow: &FlowAssignment, variant: usize) -> f64 {
    let mut total = 0.0;
    for (arc, x) in flow.iter() {
        let xf = x as f64;
        // Deterministic per-arc parameters derived from the arc's position.
        let (l, t) = (arc.tail().row, arc.tail().col);
        let (setup, slope) = (1.0 + ((l + 2 * t) % 3) as f64, 0.5 + (t % 2) as f64);
        total += match variant {
            0 => slope * xf,
            1 => {
                if x > 0 {
                    setup + slope * xf
                } else {
                    0.0
                }
            }
            _ => 2.0 * xf.sqrt(),
        };
        let _ = grid;
    }
    total
}

/// The same cost families expressed as `CostSpec`s for the library side.
fn spec_costs(grid: &GridSpec, variant: usize) -> GridSpec {
    let mut builder = GridSpec::builder(grid.rows(), grid.cols()).supplies(
        (0..grid.rows())
            .map(|l| grid.row_supplies(l).to_vec())
            .collect(),
    );
    for arc in grid.arcs() {
        if let Capacity::Finite(u) = grid.capacity(arc) {
            builder = builder.capacity(arc, u);
        }
        let (l, t) = (arc.tail().row, arc.tail().col);
        let (setup, slope) = (1.0 + ((l + 2 * t) % 3) as f64, 0.5 + (t % 2) as f64);
        let cost = match variant {
            0 => CostSpec::linear(slope),
            1 => CostSpec::fixed_charge(setup, slope),
            _ => CostSpec::power(2.0, 0.5),
        };
        builder = builder.cost(arc, cost);
    }
    builder.build().unwrap()
}

#[test]
fn minimum_over_extreme_points_equals_minimum_over_all_flows() {
    for grid in corpus() {
        let flows = all_feasible_flows(&grid);
        if flows.is_empty() {
            continue;
        }
        for variant in 0..3 {
            let everywhere = flows
                .iter()
                .map(|f| formula_cost(&grid, f, variant))
                .fold(f64::INFINITY, f64::min);
            let on_extremes = enumerate_extreme_points(&grid)
                .unwrap()
                .iter()
                .map(|f| formula_cost(&grid, f, variant))
                .fold(f64::INFINITY, f64::min);
            assert!(
                (everywhere - on_extremes).abs() <= 1e-9 * everywhere.abs().max(1.0),
                "variant {variant}: extreme-point minimum {on_extremes} \
                 misses global minimum {everywhere}"
            );
        }
    }
}

#[test]
fn cost_specs_agree_with_the_closed_formulas_on_every_flow() {
    for grid in corpus() {
        for variant in 0..3 {
            let priced = spec_costs(&grid, variant);
            for f in all_feasible_flows(&grid) {
                let lib = evaluate_cost(&priced, &f).unwrap();
                let own = formula_cost(&grid, &f, variant);
                assert!(
                    (lib - own).abs() <= 1e-9 * own.abs().max(1.0),
                    "variant {variant}: library cost {lib} != formula cost {own}"
                );
            }
        }
    }
}

#[test]
fn solver_reaches_the_exhaustive_minimum_on_every_corpus_grid() {
    for grid in corpus() {
        let flows = all_feasible_flows(&grid);
        if flows.is_empty() {
            continue;
        }
        for variant in 0..3 {
            let priced = spec_costs(&grid, variant);
            let best = flows
                .iter()
                .map(|f| formula_cost(&grid, f, variant))
                .fold(f64::INFINITY, f64::min);
            let sol = solve(&priced).unwrap();
            assert!(
                (sol.cost - best).abs() <= 1e-9 * best.abs().max(1.0),
                "variant {variant} via {}: cost {} but exhaustive minimum {best}",
                sol.method,
                sol.cost
            );
            // The reported flow must itself be feasible and extreme.
            assert!(has_acyclic_free_arcs(&priced, &sol.flow));
            let recost = formula_cost(&grid, &sol.flow, variant);
            assert!((recost - sol.cost).abs() <= 1e-9 * recost.abs().max(1.0));
        }
    }
}

#[test]
fn unstructured_instances_fall_back_to_brute_force_and_still_match() {
    // Sources spread over two rows with the sink in a third: none of the
    // structured families apply.
    let grid = GridSpec::builder(3, 2)
        .supplies(vec![vec![1, 0], vec![2, 0], vec![0, -3]])
        .build()
        .unwrap();
    let priced = spec_costs(&grid, 1);
    let sol = solve(&priced).unwrap();
    assert_eq!(sol.method, SolveMethod::BruteForce);
    let best = all_feasible_flows(&grid)
        .iter()
        .map(|f| formula_cost(&grid, f, 1))
        .fold(f64::INFINITY, f64::min);
    assert!((sol.cost - best).abs() <= 1e-9 * best.abs().max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Random small grids: the oracle must equal the filtered exhaustive
    /// enumeration exactly, for any placement of supplies and capacities.
    #[test]
    fn oracle_matches_exhaustive_on_random_grids(
        rows in 2usize..=3,
        cols in 2usize..=3,
        sources in proptest::collection::vec((0usize..9, 1i64..=3), 1..=2),
        sinks in proptest::collection::vec(0usize..9, 1..=3),
        caps in proptest::collection::vec((0usize..12, 1i64..=2), 0..=2),
    ) {
        let mut supplies = vec![vec![0i64; cols]; rows];
        for (pos, amount) in &sources {
            supplies[(pos / cols) % rows][pos % cols] += amount;
        }
        let total: i64 = supplies.iter().flatten().sum();
        let mut remaining = total;
        for (i, pos) in sinks.iter().enumerate() {
            let take = if i + 1 == sinks.len() {
                remaining
            } else {
                remaining.min(remaining / 2 + 1)
            };
            supplies[(pos / cols) % rows][pos % cols] -= take;
            remaining -= take;
        }
        prop_assume!(supplies.iter().flatten().sum::<i64>() == 0);

        let mut builder = GridSpec::builder(rows, cols).supplies(supplies);
        let arcs: Vec<ArcId> = GridSpec::builder(rows, cols)
            .supplies(vec![vec![0; cols]; rows])
            .build()
            .unwrap()
            .arcs()
            .collect();
        for (idx, cap) in &caps {
            builder = builder.capacity(arcs[idx % arcs.len()], *cap);
        }
        let grid = builder.build().unwrap();

        let expected: BTreeSet<Vec<i64>> = all_feasible_flows(&grid)
            .iter()
            .filter(|f| has_acyclic_free_arcs(&grid, f))
            .map(key)
            .collect();
        let oracle: BTreeSet<Vec<i64>> = enumerate_extreme_points(&grid)
            .unwrap()
            .iter()
            .map(key)
            .collect();
        prop_assert_eq!(oracle, expected);
    }
}
