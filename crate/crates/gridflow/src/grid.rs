//! Grid instances: vertices, arcs, supplies, capacities, and flows.
//!
//! Vertices are addressed as `(row, col)`, zero-based, row 0 on top. Every
//! vertex has at most two outgoing arcs: `Forward` to the right neighbor and
//! `Down` to the neighbor below, so the grid is a DAG and any nonnegative
//! flow on it is automatically bounded by the total supply.

use std::collections::BTreeSet;
use std::fmt;

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::maxflow;

/// Grid vertex, zero-based `(row, col)`.
///
/// Displayed one-based as `(l,t)` to match the instance file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub row: usize,
    pub col: usize,
}

impl Vertex {
    pub fn new(row: usize, col: usize) -> Self {
        Vertex { row, col }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row + 1, self.col + 1)
    }
}

/// Directed grid arc, identified by its tail vertex.
///
/// `Forward(v)` runs from `v` to the vertex on its right, `Down(v)` to the
/// vertex below. Ordering is row-major by tail with `Forward` before `Down`,
/// which is the canonical arc order used for every deterministic scan and
/// tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcId {
    Forward(Vertex),
    Down(Vertex),
}

impl ArcId {
    pub fn tail(self) -> Vertex {
        match self {
            ArcId::Forward(v) | ArcId::Down(v) => v,
        }
    }

    pub fn head(self) -> Vertex {
        match self {
            ArcId::Forward(v) => Vertex::new(v.row, v.col + 1),
            ArcId::Down(v) => Vertex::new(v.row + 1, v.col),
        }
    }

    pub fn is_forward(self) -> bool {
        matches!(self, ArcId::Forward(_))
    }

    fn sort_key(self) -> (usize, usize, u8) {
        let v = self.tail();
        let dir = if self.is_forward() { 0 } else { 1 };
        (v.row, v.col, dir)
    }
}

impl PartialOrd for ArcId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ArcId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.tail(), self.head())
    }
}

/// Arc capacity: a nonnegative integer bound or unbounded.
///
/// `Unbounded` is symbolic; no sentinel value stands in for it anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(i64),
    Unbounded,
}

impl Capacity {
    pub fn admits(self, flow: i64) -> bool {
        match self {
            Capacity::Finite(u) => flow <= u,
            Capacity::Unbounded => true,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Capacity::Finite(u) => Some(u),
            Capacity::Unbounded => None,
        }
    }

    /// The effective bound once flows are known to be at most `limit`.
    pub fn min_with(self, limit: i64) -> i64 {
        match self {
            Capacity::Finite(u) => u.min(limit),
            Capacity::Unbounded => limit,
        }
    }
}

impl From<i64> for Capacity {
    fn from(v: i64) -> Self {
        Capacity::Finite(v)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(u) => write!(f, "{u}"),
            Capacity::Unbounded => write!(f, "inf"),
        }
    }
}

pub(crate) fn forward_arc_count(rows: usize, cols: usize) -> usize {
    rows * (cols - 1)
}

pub(crate) fn arc_count(rows: usize, cols: usize) -> usize {
    rows * (cols - 1) + (rows - 1) * cols
}

/// Dense arc index: forward arcs row-major, then downward arcs row-major.
pub(crate) fn arc_index(rows: usize, cols: usize, arc: ArcId) -> Option<usize> {
    match arc {
        ArcId::Forward(v) if v.row < rows && v.col + 1 < cols => Some(v.row * (cols - 1) + v.col),
        ArcId::Down(v) if v.row + 1 < rows && v.col < cols => {
            Some(forward_arc_count(rows, cols) + v.row * cols + v.col)
        }
        _ => None,
    }
}

/// Arcs of an `rows x cols` grid in canonical (tail row-major, forward
/// before down) order.
pub(crate) fn grid_arcs(rows: usize, cols: usize) -> impl Iterator<Item = ArcId> {
    (0..rows).flat_map(move |l| {
        (0..cols).flat_map(move |t| {
            let fwd = (t + 1 < cols).then(|| ArcId::Forward(Vertex::new(l, t)));
            let down = (l + 1 < rows).then(|| ArcId::Down(Vertex::new(l, t)));
            fwd.into_iter().chain(down)
        })
    })
}

/// An integer flow value per arc of one grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowAssignment {
    rows: usize,
    cols: usize,
    values: Vec<i64>,
}

impl FlowAssignment {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FlowAssignment {
            rows,
            cols,
            values: vec![0; arc_count(rows, cols)],
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        Self::zeros(grid.rows(), grid.cols())
    }

    /// Wraps dense per-arc values (in dense arc-index order).
    pub(crate) fn from_dense(rows: usize, cols: usize, values: Vec<i64>) -> Self {
        debug_assert_eq!(values.len(), arc_count(rows, cols));
        FlowAssignment { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, arc: ArcId) -> i64 {
        let idx = arc_index(self.rows, self.cols, arc)
            .unwrap_or_else(|| panic!("arc {arc} outside a {}x{} grid", self.rows, self.cols));
        self.values[idx]
    }

    pub fn set(&mut self, arc: ArcId, value: i64) {
        let idx = arc_index(self.rows, self.cols, arc)
            .unwrap_or_else(|| panic!("arc {arc} outside a {}x{} grid", self.rows, self.cols));
        self.values[idx] = value;
    }

    /// All arcs with their values, in canonical arc order.
    pub fn iter(&self) -> impl Iterator<Item = (ArcId, i64)> + '_ {
        grid_arcs(self.rows, self.cols).map(move |a| (a, self.get(a)))
    }

    /// Arcs carrying nonzero flow, in canonical arc order.
    pub fn nonzero(&self) -> impl Iterator<Item = (ArcId, i64)> + '_ {
        self.iter().filter(|&(_, x)| x != 0)
    }

}

/// One constraint violated by a flow assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Outflow minus inflow differs from the vertex supply.
    Balance {
        vertex: Vertex,
        expected: i64,
        actual: i64,
    },
    Negative {
        arc: ArcId,
        flow: i64,
    },
    ExceedsCapacity {
        arc: ArcId,
        flow: i64,
        capacity: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Balance {
                vertex,
                expected,
                actual,
            } => write!(
                f,
                "vertex {vertex} must net {expected} outflow, nets {actual}"
            ),
            Violation::Negative { arc, flow } => write!(f, "arc {arc} carries negative flow {flow}"),
            Violation::ExceedsCapacity {
                arc,
                flow,
                capacity,
            } => write!(f, "arc {arc} carries {flow}, over its capacity {capacity}"),
        }
    }
}

/// Result of checking a flow against balance and bound constraints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlowCheck {
    pub violations: Vec<Violation>,
}

impl FlowCheck {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Which solvable family an instance belongs to.
///
/// Counts and row indices refer to the instance as classified (row index
/// zero-based); `Display` renders them one-based for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceCase {
    /// Two-row grid with at least one finite capacity; candidate values are
    /// driven by the number of distinct finite downward capacities.
    TwoRowDownwardCaps { distinct_downward_caps: usize },
    /// All terminals within a band of at most two rows; candidate values are
    /// driven by the number of distinct finite capacities inside the band.
    TwoTerminalRows { distinct_caps: usize },
    /// Uncapacitated grid with every source in one row and no sink above it.
    SourcesOneRow { source_row: usize },
    /// No polynomial family applies; only brute force remains.
    Unsupported,
}

impl fmt::Display for InstanceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceCase::TwoRowDownwardCaps {
                distinct_downward_caps,
            } => write!(f, "two-row-downward-caps(k1={distinct_downward_caps})"),
            InstanceCase::TwoTerminalRows { distinct_caps } => {
                write!(f, "two-terminal-rows(k={distinct_caps})")
            }
            InstanceCase::SourcesOneRow { source_row } => {
                write!(f, "sources-one-row(row={})", source_row + 1)
            }
            InstanceCase::Unsupported => write!(f, "unsupported"),
        }
    }
}

/// A complete grid instance.
///
/// Built through [`GridSpec::builder`]; construction validates supply
/// balance, capacity signs, and cost-function concavity, so a `GridSpec`
/// value is always internally consistent.
#[derive(Debug, Clone)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    supplies: Vec<i64>,
    capacities: Vec<Capacity>,
    costs: Vec<CostSpec>,
    total_supply: i64,
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.supplies == other.supplies
            && self.capacities == other.capacities
            && self.costs == other.costs
    }
}

impl GridSpec {
    pub fn builder(rows: usize, cols: usize) -> GridBuilder {
        GridBuilder::new(rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let cols = self.cols;
        (0..self.rows).flat_map(move |l| (0..cols).map(move |t| Vertex::new(l, t)))
    }

    /// Arcs in canonical order.
    pub fn arcs(&self) -> impl Iterator<Item = ArcId> + 'static {
        grid_arcs(self.rows, self.cols)
    }

    pub fn contains_arc(&self, arc: ArcId) -> bool {
        arc_index(self.rows, self.cols, arc).is_some()
    }

    pub fn supply(&self, v: Vertex) -> i64 {
        assert!(v.row < self.rows && v.col < self.cols, "vertex {v} outside grid");
        self.supplies[v.row * self.cols + v.col]
    }

    pub fn row_supplies(&self, row: usize) -> &[i64] {
        &self.supplies[row * self.cols..(row + 1) * self.cols]
    }

    pub fn capacity(&self, arc: ArcId) -> Capacity {
        let idx = arc_index(self.rows, self.cols, arc)
            .unwrap_or_else(|| panic!("arc {arc} outside a {}x{} grid", self.rows, self.cols));
        self.capacities[idx]
    }

    pub fn cost(&self, arc: ArcId) -> &CostSpec {
        let idx = arc_index(self.rows, self.cols, arc)
            .unwrap_or_else(|| panic!("arc {arc} outside a {}x{} grid", self.rows, self.cols));
        &self.costs[idx]
    }

    /// Total positive supply; every arc flow in a feasible flow is at most
    /// this, because all flow decomposes into source-to-sink paths in a DAG.
    pub fn total_supply(&self) -> i64 {
        self.total_supply
    }

    pub fn sources(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices().filter(|&v| self.supply(v) > 0)
    }

    pub fn sinks(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices().filter(|&v| self.supply(v) < 0)
    }

    /// Distinct finite capacity values over a set of arcs.
    pub(crate) fn distinct_finite_caps(
        &self,
        arcs: impl Iterator<Item = ArcId>,
    ) -> BTreeSet<i64> {
        arcs.filter_map(|a| self.capacity(a).finite()).collect()
    }

    /// Rows containing any terminal, ascending.
    pub(crate) fn terminal_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .filter(|&l| self.row_supplies(l).iter().any(|&b| b != 0))
            .collect()
    }

}

/// Staged construction of a [`GridSpec`].
///
/// Arcs not mentioned default to unbounded capacity and zero cost. Repeated
/// settings of the same arc keep the last value.
pub struct GridBuilder {
    rows: usize,
    cols: usize,
    supplies: Option<Vec<i64>>,
    capacities: Vec<(ArcId, Capacity)>,
    costs: Vec<(ArcId, CostSpec)>,
    tolerance: f64,
}

impl GridBuilder {
    fn new(rows: usize, cols: usize) -> Self {
        GridBuilder {
            rows,
            cols,
            supplies: None,
            capacities: Vec::new(),
            costs: Vec::new(),
            tolerance: crate::cost::DEFAULT_TOLERANCE,
        }
    }

    /// Supplies as an `L x T` matrix, row-major.
    pub fn supplies(mut self, rows: Vec<Vec<i64>>) -> Self {
        self.supplies = Some(rows.into_iter().flatten().collect());
        self
    }

    pub fn capacity(mut self, arc: ArcId, cap: impl Into<Capacity>) -> Self {
        self.capacities.push((arc, cap.into()));
        self
    }

    pub fn cost(mut self, arc: ArcId, cost: CostSpec) -> Self {
        self.costs.push((arc, cost));
        self
    }

    /// Tolerance used by the concavity spot check on opaque cost functions.
    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn build(self) -> Result<GridSpec> {
        let (rows, cols) = (self.rows, self.cols);
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid { rows, cols });
        }
        let supplies = self.supplies.unwrap_or_else(|| vec![0; rows * cols]);
        if supplies.len() != rows * cols {
            return Err(Error::SupplyShape { rows, cols });
        }
        let net: i64 = supplies.iter().sum();
        if net != 0 {
            return Err(Error::NetSupplyNonzero(net));
        }
        let total_supply: i64 = supplies.iter().filter(|&&b| b > 0).sum();

        let mut capacities = vec![Capacity::Unbounded; arc_count(rows, cols)];
        for (arc, cap) in self.capacities {
            let idx = arc_index(rows, cols, arc).ok_or(Error::UnknownArc { arc, rows, cols })?;
            if let Capacity::Finite(u) = cap {
                if u < 0 {
                    return Err(Error::NegativeCapacity { arc, value: u });
                }
            }
            capacities[idx] = cap;
        }

        let mut costs = vec![CostSpec::Zero; arc_count(rows, cols)];
        for (arc, cost) in self.costs {
            let idx = arc_index(rows, cols, arc).ok_or(Error::UnknownArc { arc, rows, cols })?;
            costs[idx] = cost;
        }
        for arc in grid_arcs(rows, cols) {
            let idx = arc_index(rows, cols, arc).expect("arc of own grid");
            let spec = &costs[idx];
            spec.validate_params()
                .map_err(|reason| Error::BadCostSpec { arc, reason })?;
            let sample_bound = capacities[idx].min_with(total_supply);
            if let Err(at) = spec.spot_check_concavity(sample_bound, self.tolerance) {
                return Err(Error::NonconcaveCost { arc, at });
            }
        }

        Ok(GridSpec {
            rows,
            cols,
            supplies,
            capacities,
            costs,
            total_supply,
        })
    }
}

/// Checks a flow against flow balance and arc bounds. Never errors; the
/// verdict lists every violated constraint.
pub fn check_flow(grid: &GridSpec, flow: &FlowAssignment) -> FlowCheck {
    let mut violations = Vec::new();
    if flow.rows() != grid.rows() || flow.cols() != grid.cols() {
        // A flow for different dimensions violates balance everywhere;
        // report it as a single balance violation at the origin.
        violations.push(Violation::Balance {
            vertex: Vertex::new(0, 0),
            expected: grid.supply(Vertex::new(0, 0)),
            actual: 0,
        });
        return FlowCheck { violations };
    }
    for arc in grid.arcs() {
        let x = flow.get(arc);
        if x < 0 {
            violations.push(Violation::Negative { arc, flow: x });
        }
        if let Capacity::Finite(u) = grid.capacity(arc) {
            if x > u {
                violations.push(Violation::ExceedsCapacity {
                    arc,
                    flow: x,
                    capacity: u,
                });
            }
        }
    }
    for v in grid.vertices() {
        let mut net = 0;
        for arc in [ArcId::Forward(v), ArcId::Down(v)] {
            if grid.contains_arc(arc) {
                net += flow.get(arc);
            }
        }
        let up = if v.row > 0 {
            Some(ArcId::Down(Vertex::new(v.row - 1, v.col)))
        } else {
            None
        };
        let left = if v.col > 0 {
            Some(ArcId::Forward(Vertex::new(v.row, v.col - 1)))
        } else {
            None
        };
        for arc in up.into_iter().chain(left) {
            net -= flow.get(arc);
        }
        let expected = grid.supply(v);
        if net != expected {
            violations.push(Violation::Balance {
                vertex: v,
                expected,
                actual: net,
            });
        }
    }
    FlowCheck { violations }
}

/// Total cost of a feasible flow; exactly one cost evaluation per arc.
pub fn evaluate_cost(grid: &GridSpec, flow: &FlowAssignment) -> Result<f64> {
    let check = check_flow(grid, flow);
    if !check.is_ok() {
        return Err(Error::InfeasibleFlow {
            violations: check.violations,
        });
    }
    Ok(grid
        .arcs()
        .map(|a| grid.cost(a).eval(flow.get(a)))
        .sum())
}

/// Decides whether any feasible flow exists, via a max-flow check from a
/// super-source over all sources to a super-sink over all sinks.
pub fn check_instance_feasible(grid: &GridSpec) -> bool {
    maxflow::instance_feasible(grid)
}

/// Picks the cheapest solvable family whose guard the instance satisfies.
///
/// Priority: two-row grids with finite capacities, then capacitated
/// two-terminal-row bands, then uncapacitated single-source-row grids, then
/// uncapacitated two-terminal-row bands, else unsupported.
pub fn classify_instance(grid: &GridSpec) -> InstanceCase {
    let k_all = grid.distinct_finite_caps(grid.arcs()).len();
    let terminal_rows = grid.terminal_rows();
    let two_terminal_band = terminal_rows.len() <= 2;

    if k_all >= 1 {
        if grid.rows() == 2 {
            let k1 = grid
                .distinct_finite_caps(grid.arcs().filter(|a| !a.is_forward()))
                .len();
            return InstanceCase::TwoRowDownwardCaps {
                distinct_downward_caps: k1,
            };
        }
        if two_terminal_band {
            return InstanceCase::TwoTerminalRows {
                distinct_caps: banded_distinct_caps(grid, &terminal_rows),
            };
        }
        return InstanceCase::Unsupported;
    }

    let source_rows: BTreeSet<usize> = grid.sources().map(|v| v.row).collect();
    let sink_rows: BTreeSet<usize> = grid.sinks().map(|v| v.row).collect();
    let source_row = source_rows.first().copied().unwrap_or(0);
    let sinks_above = sink_rows.first().is_some_and(|&r| r < source_row);
    if source_rows.len() <= 1 && !sinks_above {
        return InstanceCase::SourcesOneRow { source_row };
    }
    if two_terminal_band {
        return InstanceCase::TwoTerminalRows { distinct_caps: 0 };
    }
    InstanceCase::Unsupported
}

fn banded_distinct_caps(grid: &GridSpec, terminal_rows: &[usize]) -> usize {
    let (top, bottom) = match (terminal_rows.first(), terminal_rows.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0, 0),
    };
    grid.distinct_finite_caps(grid.arcs().filter(|a| {
        let v = a.tail();
        match a {
            ArcId::Forward(_) => v.row >= top && v.row <= bottom,
            ArcId::Down(_) => v.row >= top && v.row + 1 <= bottom,
        }
    }))
    .len()
}
