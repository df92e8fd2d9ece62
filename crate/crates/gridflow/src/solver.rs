//! Stage-graph shortest-path solver.
//!
//! A feasible flow on an `L x T` grid is determined by the forward flows it
//! sends across each column boundary plus the downward flows inside each
//! column — and the downward flows are themselves forced by vertex balance
//! once the boundary flows are fixed. That makes the problem a shortest
//! path over a `(T+1)`-partite graph: stage `t` holds every plausible
//! vector of forward flows entering column `t`, and an arc between
//! consecutive stages exists when the forced downward flows are nonnegative
//! and within capacity. Restricting each row's coordinate to its candidate
//! value set keeps the stages polynomially small on the structured instance
//! families while provably retaining an optimal extreme point.
//!
//! Costs are charged so every grid arc is paid exactly once: a transition
//! out of stage `t` pays the forward arcs whose flow the stage-`t` state
//! carries (none for stage 0, which is a virtual empty boundary) plus the
//! downward arcs of column `t`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::candidates::{candidate_sets, CandidateValueSet};
use crate::cost::DEFAULT_TOLERANCE;
use crate::error::{Error, Result};
use crate::extreme::{enumerate_extreme_points_with, OracleBudget};
use crate::grid::{
    check_flow, check_instance_feasible, classify_instance, evaluate_cost, ArcId, FlowAssignment,
    GridSpec, InstanceCase, Vertex,
};
use crate::ExecMode;

/// Tunables for [`solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Sequential or data-parallel execution; results are identical.
    pub exec: ExecMode,
    /// Budget for the brute-force fallback on unstructured instances.
    pub oracle_budget: OracleBudget,
    /// Maximum number of stage-graph transition evaluations.
    pub state_budget: u64,
    /// Relative tolerance for the cost cross-check on the recovered flow.
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            exec: ExecMode::default(),
            oracle_budget: OracleBudget::default(),
            state_budget: 5_000_000,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// How a [`Solution`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Candidate-value stage graph with a shortest-path pass.
    StateDp { case: InstanceCase },
    /// Exhaustive scan over spanning-tree extreme points.
    BruteForce,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveMethod::StateDp { case } => write!(f, "state-dp({case})"),
            SolveMethod::BruteForce => write!(f, "brute-force"),
        }
    }
}

/// Work counters from one solve, useful for reports and growth checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Total states across all stages (zero for brute force).
    pub states: u64,
    /// States in each stage, boundary by boundary (empty for brute force).
    pub stage_state_counts: Vec<usize>,
    /// Transitions stored in the stage graph (zero for brute force).
    pub transitions: u64,
    /// Candidate set size per row (empty for brute force).
    pub candidate_row_sizes: Vec<usize>,
    /// Extreme points scanned by the brute-force fallback.
    pub extreme_points: Option<u64>,
}

/// An optimal flow with its exact cost and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub flow: FlowAssignment,
    pub cost: f64,
    pub method: SolveMethod,
    pub stats: SolveStats,
}

/// The `(T+1)`-partite graph of boundary-flow states.
///
/// Stage `t` (for `1 <= t <= T-1`) holds `L`-vectors giving the flow on
/// each row's forward arc from column `t-1` into column `t`; stages `0` and
/// `T` hold the single all-zero vector. States are lexicographically
/// sorted, and every stored transition has finite cost and an implied
/// downward-flow vector that is nonnegative and within capacity.
#[derive(Debug, Clone)]
pub struct StateGraph {
    rows: usize,
    cols: usize,
    stages: Vec<Vec<Vec<i64>>>,
    arcs: Vec<Vec<Vec<(usize, f64)>>>,
    transitions: u64,
}

impl StateGraph {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Lexicographically sorted states of one stage.
    pub fn states(&self, stage: usize) -> &[Vec<i64>] {
        &self.stages[stage]
    }

    /// Stored transitions out of one state, as `(head index, cost)` pairs
    /// in ascending head order.
    pub fn transitions_from(&self, stage: usize, state: usize) -> &[(usize, f64)] {
        &self.arcs[stage][state]
    }

    pub fn transition_count(&self) -> u64 {
        self.transitions
    }

    /// Walks a feasible flow through the graph and returns the summed
    /// transition costs, or `None` if some boundary vector or transition of
    /// the flow is missing from the graph.
    ///
    /// For any flow the graph covers, this must equal the flow's direct
    /// cost: it is the express check that path lengths and flow costs agree.
    pub fn replay(&self, flow: &FlowAssignment) -> Option<f64> {
        let mut total = 0.0;
        let mut tail = 0usize;
        for t in 1..self.cols + 1 {
            let state: Vec<i64> = if t == self.cols {
                vec![0; self.rows]
            } else {
                (0..self.rows)
                    .map(|l| flow.get(ArcId::Forward(Vertex::new(l, t - 1))))
                    .collect()
            };
            let head = self.stages[t].binary_search(&state).ok()?;
            let &(_, cost) = self.arcs[t - 1][tail].iter().find(|&&(j, _)| j == head)?;
            total += cost;
            tail = head;
        }
        Some(total)
    }
}

/// Solves with default options.
pub fn solve(grid: &GridSpec) -> Result<Solution> {
    solve_with(grid, &SolveOptions::default())
}

/// Classifies the instance, builds the candidate stage graph, and extracts
/// a minimum-cost flow; unstructured instances fall back to the budgeted
/// brute-force oracle. Ties are broken toward the lexicographically
/// smallest state sequence, so reruns return byte-identical solutions.
pub fn solve_with(grid: &GridSpec, opts: &SolveOptions) -> Result<Solution> {
    if !check_instance_feasible(grid) {
        return Err(Error::InfeasibleInstance);
    }
    let case = classify_instance(grid);
    if case == InstanceCase::Unsupported {
        return brute_force(grid, opts);
    }
    let cands = candidate_sets(grid)?;
    let graph = build_state_graph(grid, &cands, opts)?;
    let (path, cost) = shortest_path(&graph)?;
    let flow = recover_flow(grid, &graph, &path)?;
    let direct = evaluate_cost(grid, &flow)?;
    if (direct - cost).abs() > opts.tolerance * cost.abs().max(1.0) {
        return Err(Error::Internal(format!(
            "stage-graph cost {cost} disagrees with direct flow cost {direct}"
        )));
    }
    let stats = SolveStats {
        states: graph.stages.iter().map(|s| s.len() as u64).sum(),
        stage_state_counts: graph.stages.iter().map(Vec::len).collect(),
        transitions: graph.transitions,
        candidate_row_sizes: cands.per_row.iter().map(Vec::len).collect(),
        extreme_points: None,
    };
    Ok(Solution {
        flow,
        cost,
        method: SolveMethod::StateDp { case },
        stats,
    })
}

fn brute_force(grid: &GridSpec, opts: &SolveOptions) -> Result<Solution> {
    let points =
        enumerate_extreme_points_with(grid, opts.oracle_budget, opts.exec).map_err(|e| match e {
            Error::TooLarge { found, budget } => Error::Unsupported {
                reason: format!(
                    "no structured case applies and brute force exceeds its budget \
                     ({found} > {budget})"
                ),
            },
            other => other,
        })?;
    let mut best: Option<(f64, &FlowAssignment)> = None;
    for point in &points {
        let cost = evaluate_cost(grid, point)?;
        if best.map_or(true, |(c, _)| cost < c) {
            best = Some((cost, point));
        }
    }
    let (cost, flow) = best.ok_or(Error::Internal(
        "feasible instance yielded no extreme points".into(),
    ))?;
    Ok(Solution {
        flow: flow.clone(),
        cost,
        method: SolveMethod::BruteForce,
        stats: SolveStats {
            extreme_points: Some(points.len() as u64),
            ..SolveStats::default()
        },
    })
}

/// Builds the stage graph for the given candidate sets.
///
/// Errors with [`Error::EmptyStage`] when filtering wipes out a stage and
/// with [`Error::StateSpaceTooLarge`] when enumeration or transition work
/// would exceed `opts.state_budget`.
pub fn build_state_graph(
    grid: &GridSpec,
    cands: &CandidateValueSet,
    opts: &SolveOptions,
) -> Result<StateGraph> {
    let (rows, cols) = (grid.rows(), grid.cols());
    let budget = opts.state_budget;

    // Running supply totals: everything injected strictly before column t
    // must be crossing boundary t.
    let mut cumulative = vec![0i64; cols + 1];
    for t in 0..cols {
        let col_sum: i64 = (0..rows).map(|l| grid.supply(Vertex::new(l, t))).sum();
        cumulative[t + 1] = cumulative[t] + col_sum;
    }

    let mut stages: Vec<Vec<Vec<i64>>> = Vec::with_capacity(cols + 1);
    stages.push(vec![vec![0; rows]]);
    for t in 1..cols {
        let states = stage_states(grid, cands, t, cumulative[t], budget)?;
        if states.is_empty() {
            return Err(Error::EmptyStage(t));
        }
        stages.push(states);
    }
    stages.push(vec![vec![0; rows]]);

    let work: u128 = (0..cols)
        .map(|t| stages[t].len() as u128 * stages[t + 1].len() as u128)
        .sum();
    if work > u128::from(budget) {
        return Err(Error::StateSpaceTooLarge {
            found: work.min(u128::from(u64::MAX)) as u64,
            budget,
        });
    }

    let mut arcs: Vec<Vec<Vec<(usize, f64)>>> = Vec::with_capacity(cols);
    let mut transitions = 0u64;
    for t in 0..cols {
        let (tails, heads) = (&stages[t], &stages[t + 1]);
        let adjacency = stage_arcs(grid, t, tails, heads, opts.exec);
        transitions += adjacency.iter().map(|a| a.len() as u64).sum::<u64>();
        arcs.push(adjacency);
    }

    Ok(StateGraph {
        rows,
        cols,
        stages,
        arcs,
        transitions,
    })
}

/// Enumerates stage `t`: products of per-row candidate values (filtered by
/// the column's own forward capacities) whose coordinates sum to the
/// running supply total, with the last row forced by that sum.
fn stage_states(
    grid: &GridSpec,
    cands: &CandidateValueSet,
    t: usize,
    cumulative: i64,
    budget: u64,
) -> Result<Vec<Vec<i64>>> {
    let rows = grid.rows();
    let filtered: Vec<Vec<i64>> = (0..rows)
        .map(|l| {
            let cap = grid.capacity(ArcId::Forward(Vertex::new(l, t - 1)));
            cands
                .row(l)
                .iter()
                .copied()
                .filter(|&v| v >= 0 && cap.admits(v))
                .collect()
        })
        .collect();

    let work = filtered[..rows - 1]
        .iter()
        .map(|f| f.len() as u128)
        .product::<u128>();
    if work > u128::from(budget) {
        return Err(Error::StateSpaceTooLarge {
            found: work.min(u128::from(u64::MAX)) as u64,
            budget,
        });
    }

    let mut states = Vec::new();
    let mut state = vec![0i64; rows];
    enumerate_states(&filtered, cumulative, 0, &mut state, &mut states);
    Ok(states)
}

fn enumerate_states(
    filtered: &[Vec<i64>],
    remaining: i64,
    row: usize,
    state: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if row == filtered.len() - 1 {
        if filtered[row].binary_search(&remaining).is_ok() {
            state[row] = remaining;
            out.push(state.clone());
        }
        return;
    }
    for &v in &filtered[row] {
        if v > remaining {
            break;
        }
        state[row] = v;
        enumerate_states(filtered, remaining - v, row + 1, state, out);
    }
}

/// Downward flows forced inside column `t` by the boundary states around
/// it, or `None` when some forced flow is negative, over capacity, or the
/// column does not balance.
fn column_downs(grid: &GridSpec, t: usize, tail: &[i64], head: &[i64]) -> Option<Vec<i64>> {
    let rows = grid.rows();
    let mut downs = Vec::with_capacity(rows.saturating_sub(1));
    let mut carry = 0i64;
    for l in 0..rows {
        let u = grid.supply(Vertex::new(l, t)) + tail[l] + carry - head[l];
        if l + 1 == rows {
            if u != 0 {
                return None;
            }
        } else {
            if u < 0 || !grid.capacity(ArcId::Down(Vertex::new(l, t))).admits(u) {
                return None;
            }
            carry = u;
            downs.push(u);
        }
    }
    Some(downs)
}

/// Cost of one stored transition: forward arcs carried by the tail state
/// (skipped for the virtual stage 0) plus the column's downward arcs.
fn transition_cost(grid: &GridSpec, t: usize, tail: &[i64], downs: &[i64]) -> f64 {
    let mut cost = 0.0;
    if t > 0 {
        for (l, &s) in tail.iter().enumerate() {
            cost += grid.cost(ArcId::Forward(Vertex::new(l, t - 1))).eval(s);
        }
    }
    for (l, &u) in downs.iter().enumerate() {
        cost += grid.cost(ArcId::Down(Vertex::new(l, t))).eval(u);
    }
    cost
}

fn arcs_from_tail(grid: &GridSpec, t: usize, tail: &[i64], heads: &[Vec<i64>]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (j, head) in heads.iter().enumerate() {
        if let Some(downs) = column_downs(grid, t, tail, head) {
            let cost = transition_cost(grid, t, tail, &downs);
            if cost.is_finite() {
                out.push((j, cost));
            }
        }
    }
    out
}

fn stage_arcs(
    grid: &GridSpec,
    t: usize,
    tails: &[Vec<i64>],
    heads: &[Vec<i64>],
    exec: ExecMode,
) -> Vec<Vec<(usize, f64)>> {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return tails
            .par_iter()
            .map(|tail| arcs_from_tail(grid, t, tail, heads))
            .collect();
    }
    let _ = exec;
    tails
        .iter()
        .map(|tail| arcs_from_tail(grid, t, tail, heads))
        .collect()
}

/// Minimum-cost source-to-sink path through the stage graph.
///
/// Returns one state index per stage plus the total cost. Among equal-cost
/// continuations the walk picks the smallest head index, i.e. the
/// lexicographically smallest state, at every step.
pub fn shortest_path(graph: &StateGraph) -> Result<(Vec<usize>, f64)> {
    let cols = graph.cols;
    let mut dist: Vec<Vec<f64>> = graph
        .stages
        .iter()
        .map(|s| vec![f64::INFINITY; s.len()])
        .collect();
    dist[cols][0] = 0.0;
    for t in (0..cols).rev() {
        let relaxed: Vec<f64> = graph.arcs[t]
            .iter()
            .map(|arcs| {
                let mut best = f64::INFINITY;
                for &(j, cost) in arcs {
                    let total = cost + dist[t + 1][j];
                    if total < best {
                        best = total;
                    }
                }
                best
            })
            .collect();
        dist[t] = relaxed;
    }
    if !dist[0][0].is_finite() {
        return Err(Error::NoPath);
    }

    let mut path = vec![0usize];
    let mut tail = 0usize;
    for t in 0..cols {
        let mut best: Option<(f64, usize)> = None;
        for &(j, cost) in &graph.arcs[t][tail] {
            let total = cost + dist[t + 1][j];
            if best.map_or(true, |(b, _)| total < b) {
                best = Some((total, j));
            }
        }
        let (_, next) = best.ok_or(Error::NoPath)?;
        path.push(next);
        tail = next;
    }
    Ok((path, dist[0][0]))
}

/// Rebuilds the full arc flow from a stage path: forward flows straight
/// from the states, downward flows from column balance.
pub fn recover_flow(grid: &GridSpec, graph: &StateGraph, path: &[usize]) -> Result<FlowAssignment> {
    let (rows, cols) = (grid.rows(), grid.cols());
    if path.len() != cols + 1 {
        return Err(Error::Internal(format!(
            "stage path has {} entries, expected {}",
            path.len(),
            cols + 1
        )));
    }
    let mut flow = FlowAssignment::zeros(rows, cols);
    for t in 1..cols {
        let state = &graph.stages[t][path[t]];
        for (l, &s) in state.iter().enumerate() {
            flow.set(ArcId::Forward(Vertex::new(l, t - 1)), s);
        }
    }
    for t in 0..cols {
        let tail = &graph.stages[t][path[t]];
        let head = &graph.stages[t + 1][path[t + 1]];
        let downs = column_downs(grid, t, tail, head).ok_or_else(|| {
            Error::Internal(format!("stored transition at column {t} became infeasible"))
        })?;
        for (l, &u) in downs.iter().enumerate() {
            flow.set(ArcId::Down(Vertex::new(l, t)), u);
        }
    }
    let check = check_flow(grid, &flow);
    if !check.is_ok() {
        return Err(Error::Internal(format!(
            "recovered flow is infeasible: {}",
            check.violations[0]
        )));
    }
    Ok(flow)
}
