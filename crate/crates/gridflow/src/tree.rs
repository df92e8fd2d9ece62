//! Spanning-tree views of extreme points and the structure they expose.
//!
//! For an uncapacitated instance with all sources in row one, the positive
//! arcs of an extreme point form a forest. [`build_accessible_spanning_tree`]
//! grows that forest into a spanning tree in which every vertex is reachable
//! from row one by a *directed* tree path — the property that makes flow
//! values over tree arcs decompose into a small family of supply sums.
//!
//! The resulting [`SpanningTreeSolution`] also carries, per vertex, the
//! earliest row-one column with a directed tree path to it (and that path),
//! plus the side classification of vertices when one tree arc is deleted.
//! Together these drive the candidate-value enumeration for the
//! single-source-row family and are heavily cross-checked in tests.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::extreme::Dsu;
use crate::grid::{check_flow, ArcId, FlowAssignment, GridSpec, Vertex};

/// Where a vertex lands when one tree arc is deleted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    /// In the component of the deleted arc's tail.
    Tail,
    /// In the head's component, with its root path crossing the deleted arc.
    HeadViaArc,
    /// In the head's component, reached from row one without that arc.
    HeadDirect,
}

/// A spanning tree over a grid in which every vertex is accessible from row
/// one via a directed tree path, plus the per-vertex earliest root column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTreeSolution {
    rows: usize,
    cols: usize,
    arcs: BTreeSet<ArcId>,
    /// Earliest root column per vertex, dense row-major.
    kappa: Vec<usize>,
    /// Tree arc through which the root path enters each vertex.
    parent: Vec<Option<ArcId>>,
}

impl SpanningTreeSolution {
    fn node(&self, v: Vertex) -> usize {
        v.row * self.cols + v.col
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Tree arcs in canonical order.
    pub fn arcs(&self) -> impl Iterator<Item = ArcId> + '_ {
        self.arcs.iter().copied()
    }

    pub fn contains(&self, arc: ArcId) -> bool {
        self.arcs.contains(&arc)
    }

    /// Smallest row-one column with a directed tree path to `v`.
    pub fn root_column(&self, v: Vertex) -> usize {
        self.kappa[self.node(v)]
    }

    /// The unique directed tree path from `(0, root_column(v))` to `v`,
    /// in root-to-vertex order. Empty when `v` is its own root.
    pub fn root_path(&self, v: Vertex) -> Vec<ArcId> {
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(arc) = self.parent[self.node(cur)] {
            path.push(arc);
            cur = arc.tail();
        }
        path.reverse();
        path
    }

    /// Vertices in the component of `deleted`'s tail once `deleted` is
    /// removed from the tree, as a dense row-major membership vector.
    fn tail_side(&self, deleted: ArcId) -> Result<Vec<bool>> {
        if !self.contains(deleted) {
            return Err(Error::NotTreeArc(deleted));
        }
        let n = self.rows * self.cols;
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for &arc in &self.arcs {
            if arc != deleted {
                let (u, v) = (arc.tail(), arc.head());
                adj[self.node(u)].push(v);
                adj[self.node(v)].push(u);
            }
        }
        let mut side = vec![false; n];
        let mut stack = vec![deleted.tail()];
        side[self.node(deleted.tail())] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[self.node(u)] {
                if !side[self.node(w)] {
                    side[self.node(w)] = true;
                    stack.push(w);
                }
            }
        }
        Ok(side)
    }

    /// Classifies `v` relative to the deletion of tree arc `deleted`.
    pub fn cut_side(&self, deleted: ArcId, v: Vertex) -> Result<CutSide> {
        let side = self.tail_side(deleted)?;
        if side[self.node(v)] {
            return Ok(CutSide::Tail);
        }
        if self.root_path(v).contains(&deleted) {
            Ok(CutSide::HeadViaArc)
        } else {
            Ok(CutSide::HeadDirect)
        }
    }

    /// Reconstructs the flow over tree arc `arc` from supplies and nontree
    /// flows alone: summing flow conservation over the tail side T of the
    /// cut gives
    ///
    /// `f(arc) = sum of supplies in T - flow leaving T + flow entering T`,
    ///
    /// where leaving/entering counts only nontree arcs. For flows whose
    /// positive arcs all sit in the tree, the last two terms vanish.
    pub fn cut_flow(&self, grid: &GridSpec, flow: &FlowAssignment, arc: ArcId) -> Result<i64> {
        let side = self.tail_side(arc)?;
        let mut total = 0;
        for v in grid.vertices() {
            if side[self.node(v)] {
                total += grid.supply(v);
            }
        }
        for e in grid.arcs() {
            if e == arc || self.contains(e) {
                continue;
            }
            let (tail_in, head_in) = (side[self.node(e.tail())], side[self.node(e.head())]);
            if tail_in && !head_in {
                total -= flow.get(e);
            } else if !tail_in && head_in {
                total += flow.get(e);
            }
        }
        Ok(total)
    }
}

/// Grows the positive arcs of `flow` into a spanning tree in which every
/// vertex is accessible from row one via a directed tree path.
///
/// Requires all sources in row one and a feasible flow whose positive arcs
/// are cycle-free (true of every extreme point of an uncapacitated
/// instance). Arcs are added deterministically: at each step the smallest
/// eligible arc in canonical order whose tail is already accessible and
/// whose addition keeps the arc set acyclic.
pub fn build_accessible_spanning_tree(
    grid: &GridSpec,
    flow: &FlowAssignment,
) -> Result<SpanningTreeSolution> {
    if let Some(v) = grid.sources().find(|v| v.row != 0) {
        return Err(Error::SourceBelowRowOne(v));
    }
    let check = check_flow(grid, flow);
    if !check.is_ok() {
        return Err(Error::InfeasibleFlow {
            violations: check.violations,
        });
    }
    let (rows, cols) = (grid.rows(), grid.cols());
    let n = rows * cols;
    let node = |v: Vertex| v.row * cols + v.col;

    let mut tree: BTreeSet<ArcId> = BTreeSet::new();
    let mut dsu = Dsu::new(n);
    for (arc, _) in flow.nonzero() {
        if !dsu.union(node(arc.tail()), node(arc.head())) {
            return Err(Error::NotExtreme);
        }
        tree.insert(arc);
    }

    while tree.len() < n - 1 {
        let accessible = accessible_from_row_one(rows, cols, &tree);
        let next = grid.arcs().find(|arc| {
            !tree.contains(arc)
                && accessible[node(arc.tail())]
                && dsu.clone().union(node(arc.tail()), node(arc.head()))
        });
        match next {
            Some(arc) => {
                dsu.union(node(arc.tail()), node(arc.head()));
                tree.insert(arc);
            }
            None => {
                return Err(Error::Internal(
                    "accessible spanning tree construction stalled".into(),
                ))
            }
        }
    }

    finish(rows, cols, tree)
}

/// Membership vector of vertices reachable from row one along directed tree
/// arcs (row-one vertices count as reachable by the empty path).
fn accessible_from_row_one(rows: usize, cols: usize, tree: &BTreeSet<ArcId>) -> Vec<bool> {
    let n = rows * cols;
    let node = |v: Vertex| v.row * cols + v.col;
    let mut out: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &arc in tree {
        out[node(arc.tail())].push(arc.head());
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<Vertex> = (0..cols).map(|t| Vertex::new(0, t)).collect();
    for v in &stack {
        seen[node(*v)] = true;
    }
    while let Some(u) = stack.pop() {
        for &w in &out[node(u)] {
            if !seen[node(w)] {
                seen[node(w)] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Computes earliest root columns and root-path parents by searching from
/// row-one vertices in ascending column order.
fn finish(rows: usize, cols: usize, arcs: BTreeSet<ArcId>) -> Result<SpanningTreeSolution> {
    let n = rows * cols;
    let node = |v: Vertex| v.row * cols + v.col;
    let mut out: Vec<Vec<ArcId>> = vec![Vec::new(); n];
    for &arc in &arcs {
        out[node(arc.tail())].push(arc);
    }
    let mut kappa = vec![usize::MAX; n];
    let mut parent: Vec<Option<ArcId>> = vec![None; n];
    for root_col in 0..cols {
        let root = Vertex::new(0, root_col);
        if kappa[node(root)] != usize::MAX {
            continue;
        }
        kappa[node(root)] = root_col;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &arc in &out[node(u)] {
                let w = arc.head();
                if kappa[node(w)] == usize::MAX {
                    kappa[node(w)] = root_col;
                    parent[node(w)] = Some(arc);
                    stack.push(w);
                }
            }
        }
    }
    if kappa.contains(&usize::MAX) {
        return Err(Error::Internal(
            "spanning tree leaves a vertex inaccessible from row one".into(),
        ));
    }
    Ok(SpanningTreeSolution {
        rows,
        cols,
        arcs,
        kappa,
        parent,
    })
}
