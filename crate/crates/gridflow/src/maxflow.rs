//! Shortest-augmenting-path max flow, used only to decide feasibility.
//!
//! Small and self-contained: grids here have at most a few thousand arcs and
//! the check runs once per solve, so the classic O(V * E^2) bound is plenty.

use std::collections::VecDeque;

use crate::grid::GridSpec;

struct Edge {
    to: usize,
    cap: i64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0 });
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let mut total = 0;
        loop {
            // BFS for the shortest augmenting path, remembering entry edges.
            let mut entry = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([source]);
            entry[source] = usize::MAX - 1;
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let Edge { to, cap } = self.edges[e];
                    if cap > 0 && entry[to] == usize::MAX {
                        entry[to] = e;
                        if to == sink {
                            break 'bfs;
                        }
                        queue.push_back(to);
                    }
                }
            }
            if entry[sink] == usize::MAX {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = sink;
            while v != source {
                let e = entry[v];
                bottleneck = bottleneck.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = entry[v];
                self.edges[e].cap -= bottleneck;
                self.edges[e ^ 1].cap += bottleneck;
                v = self.edges[e ^ 1].to;
            }
            total += bottleneck;
        }
    }
}

/// True when some flow routes every unit of supply to the sinks within the
/// arc capacities.
pub(crate) fn instance_feasible(grid: &GridSpec) -> bool {
    let (rows, cols) = (grid.rows(), grid.cols());
    let node = |l: usize, t: usize| l * cols + t;
    let source = rows * cols;
    let sink = rows * cols + 1;
    let budget = grid.total_supply();
    let mut net = Network::new(rows * cols + 2);
    for arc in grid.arcs() {
        let (u, v) = (arc.tail(), arc.head());
        net.add_edge(
            node(u.row, u.col),
            node(v.row, v.col),
            grid.capacity(arc).min_with(budget),
        );
    }
    for v in grid.vertices() {
        let b = grid.supply(v);
        if b > 0 {
            net.add_edge(source, node(v.row, v.col), b);
        } else if b < 0 {
            net.add_edge(node(v.row, v.col), sink, -b);
        }
    }
    net.max_flow(source, sink) == budget
}
