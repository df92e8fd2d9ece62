//! Crate-wide error type.

use crate::grid::{ArcId, Vertex, Violation};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Supplies do not balance: the sum over all vertices must be zero.
    #[error("net supply must be zero, found {0}")]
    NetSupplyNonzero(i64),

    /// An arc coordinate that does not exist in the grid.
    #[error("arc {arc} does not exist in a {rows}x{cols} grid")]
    UnknownArc { arc: ArcId, rows: usize, cols: usize },

    /// Grid dimensions must both be at least one.
    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    EmptyGrid { rows: usize, cols: usize },

    /// The supply matrix does not match the grid dimensions.
    #[error("supply matrix shape does not match a {rows}x{cols} grid")]
    SupplyShape { rows: usize, cols: usize },

    /// Capacities are nonnegative integers (or unbounded).
    #[error("negative capacity {value} on arc {arc}")]
    NegativeCapacity { arc: ArcId, value: i64 },

    /// A cost description with invalid parameters.
    #[error("invalid cost on arc {arc}: {reason}")]
    BadCostSpec { arc: ArcId, reason: String },

    /// A sampled cost function violated concavity.
    #[error("cost on arc {arc} is not concave near flow {at}")]
    NonconcaveCost { arc: ArcId, at: i64 },

    /// A flow assignment that violates balance or arc bounds.
    #[error("flow is infeasible ({} violation(s); first: {})", violations.len(), violations[0])]
    InfeasibleFlow { violations: Vec<Violation> },

    /// The instance admits no feasible flow at all.
    #[error("instance is infeasible: no flow routes all supply")]
    InfeasibleInstance,

    /// Enumeration would exceed the configured budget (vertex count or
    /// spanning-tree/bound combination count, whichever trips first).
    #[error("enumeration budget exceeded ({found} > {budget})")]
    TooLarge { found: u64, budget: u64 },

    /// No polynomial case applies and brute force is out of budget.
    #[error("no solvable case applies to this instance: {reason}")]
    Unsupported { reason: String },

    /// A case-specific routine was handed an instance outside its guard.
    #[error("instance does not match the requested case: {reason}")]
    CaseMismatch { reason: String },

    /// The positive arcs of the flow contain an undirected cycle.
    #[error("flow is not an extreme point: its positive arcs contain a cycle")]
    NotExtreme,

    /// Row-one accessibility machinery needs every source in row one.
    #[error("source at {0} lies below row one")]
    SourceBelowRowOne(Vertex),

    /// An arc was expected to belong to the spanning tree.
    #[error("arc {0} is not a tree arc")]
    NotTreeArc(ArcId),

    /// The candidate-driven stage graph lost every state at some stage.
    ///
    /// This signals a candidate-generation bug, never a property of the
    /// instance: a feasible instance always has an extreme point whose
    /// per-stage states survive filtering.
    #[error("stage {0} of the state graph has no states")]
    EmptyStage(usize),

    /// The stage graph is connected stage to stage but admits no path.
    #[error("no feasible path through the state graph")]
    NoPath,

    /// The stage graph outgrew the configured budget.
    #[error("state graph too large: {found} transitions exceed the budget of {budget}")]
    StateSpaceTooLarge { found: u64, budget: u64 },

    /// Knapsack downward bound below the largest item.
    #[error("downward capacity bound {bound} is below the largest item value {max_item}")]
    BoundBelowMaxItem { bound: i64, max_item: i64 },

    /// Partition instances need an even total.
    #[error("partition total {0} is odd, instance is trivially negative")]
    OddTotal(i64),

    /// Generator inputs must be positive integers.
    #[error("{what} must be positive, got {value}")]
    NonPositiveInput { what: &'static str, value: i64 },

    /// Malformed instance or flow file.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal consistency check failed; indicates a bug.
    #[error("internal inconsistency: {0}")]
    Internal(String),
}
