//! Exact graph edit distance by branch and bound.
//!
//! Nodes of the first graph are assigned, one at a time, either to an unused
//! node of the second graph or to deletion. Partial assignments are pruned
//! with a label-histogram bound on the remaining node costs plus an edge-count
//! bound on the remaining edge costs.

use crate::graph::{AdjacencyGraph, RelationType};

/// Largest graph the exact search accepts.
pub const MAX_GED_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GedError {
    #[error("graph has {0} nodes; exact edit distance supports at most {MAX_GED_NODES}")]
    GraphTooLarge(usize),
}

/// How edge substitutions are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeCostMode {
    /// Edges match whenever both exist (attribute-free edge matching).
    #[default]
    Unlabeled,
    /// Substituting an edge costs 1 when the relation labels differ.
    Relation,
}

struct Dense {
    class: Vec<u8>,
    /// `adj[a][b]` is the relation of `a` with respect to `b`.
    adj: Vec<Vec<Option<RelationType>>>,
    edge_count: usize,
}

impl Dense {
    fn new(g: &AdjacencyGraph) -> Self {
        let n = g.nodes.len();
        let pos = |idx: u32| g.nodes.iter().position(|&(i, _)| i == idx);
        let mut adj = vec![vec![None; n]; n];
        let mut edge_count = 0;
        for &(i, j, r) in &g.edges {
            if let (Some(a), Some(b)) = (pos(i), pos(j)) {
                if a != b && adj[a][b].is_none() {
                    adj[a][b] = Some(r);
                    adj[b][a] = Some(r.inverse());
                    edge_count += 1;
                }
            }
        }
        Self { class: g.nodes.iter().map(|&(_, c)| c.color_class().index() as u8).collect(), adj, edge_count }
    }

    fn len(&self) -> usize {
        self.class.len()
    }
}

struct Search<'a> {
    g1: &'a Dense,
    g2: &'a Dense,
    mode: EdgeCostMode,
    order: Vec<usize>,
    image: Vec<Option<usize>>,
    used: Vec<bool>,
    best: usize,
}

impl Search<'_> {
    fn edge_cost(&self, e1: Option<RelationType>, e2: Option<RelationType>) -> usize {
        match (e1, e2) {
            (None, None) => 0,
            (Some(a), Some(b)) => match self.mode {
                EdgeCostMode::Unlabeled => 0,
                EdgeCostMode::Relation => usize::from(a != b),
            },
            _ => 1,
        }
    }

    /// Incremental cost of mapping the node at `depth` to `target`.
    fn step_cost(&self, depth: usize, target: Option<usize>) -> usize {
        let i = self.order[depth];
        let mut cost = match target {
            Some(u) => usize::from(self.g1.class[i] != self.g2.class[u]),
            None => 1,
        };
        for d in 0..depth {
            let k = self.order[d];
            let e1 = self.g1.adj[i][k];
            let e2 = match (target, self.image[d]) {
                (Some(u), Some(v)) => self.g2.adj[u][v],
                _ => None,
            };
            cost += self.edge_cost(e1, e2);
        }
        cost
    }

    fn lower_bound(&self, depth: usize) -> usize {
        let mut h1 = [0usize; 10];
        let mut h2 = [0usize; 10];
        let rest1 = &self.order[depth..];
        for &i in rest1 {
            h1[self.g1.class[i] as usize] += 1;
        }
        let mut n2 = 0;
        for (u, &used) in self.used.iter().enumerate() {
            if !used {
                h2[self.g2.class[u] as usize] += 1;
                n2 += 1;
            }
        }
        let common: usize = h1.iter().zip(&h2).map(|(a, b)| *a.min(b)).sum();
        let node_lb = rest1.len().max(n2) - common;

        let mut pending1 = vec![false; self.g1.len()];
        for &i in rest1 {
            pending1[i] = true;
        }
        let e1 = count_touching(self.g1, &pending1);
        let unused2: Vec<bool> = self.used.iter().map(|u| !u).collect();
        let e2 = count_touching(self.g2, &unused2);
        node_lb + e1.abs_diff(e2)
    }

    /// Insertions of the second graph's nodes and edges left unmatched.
    fn completion_cost(&self) -> usize {
        let unused: Vec<bool> = self.used.iter().map(|u| !u).collect();
        unused.iter().filter(|&&u| u).count() + count_touching(self.g2, &unused)
    }

    fn run(&mut self, depth: usize, cost: usize) {
        if cost + self.lower_bound(depth) >= self.best {
            return;
        }
        if depth == self.order.len() {
            self.best = self.best.min(cost + self.completion_cost());
            return;
        }
        let i = self.order[depth];
        let mut targets: Vec<Option<usize>> = (0..self.g2.len()).filter(|&u| !self.used[u]).map(Some).collect();
        targets.sort_by_key(|t| t.map(|u| self.g1.class[i] != self.g2.class[u]));
        targets.push(None);
        for t in targets {
            let step = self.step_cost(depth, t);
            self.image[depth] = t;
            if let Some(u) = t {
                self.used[u] = true;
            }
            self.run(depth + 1, cost + step);
            if let Some(u) = t {
                self.used[u] = false;
            }
        }
        self.image[depth] = None;
    }
}

/// Edges with at least one endpoint flagged.
fn count_touching(g: &Dense, flagged: &[bool]) -> usize {
    let n = g.len();
    let mut c = 0;
    for a in 0..n {
        for b in a + 1..n {
            if g.adj[a][b].is_some() && (flagged[a] || flagged[b]) {
                c += 1;
            }
        }
    }
    c
}

/// Minimum total cost of node and edge insertions, deletions and
/// substitutions turning `g1` into `g2`. Nodes substitute for free when
/// their legend colors agree; every other operation costs 1.
pub fn graph_edit_distance(g1: &AdjacencyGraph, g2: &AdjacencyGraph, mode: EdgeCostMode) -> Result<f64, GedError> {
    for g in [g1, g2] {
        if g.nodes.len() > MAX_GED_NODES {
            return Err(GedError::GraphTooLarge(g.nodes.len()));
        }
    }
    let (d1, d2) = (Dense::new(g1), Dense::new(g2));
    let mut order: Vec<usize> = (0..d1.len()).collect();
    let degree = |a: usize| d1.adj[a].iter().filter(|e| e.is_some()).count();
    order.sort_by_key(|&a| std::cmp::Reverse(degree(a)));
    let trivial = d1.len() + d1.edge_count + d2.len() + d2.edge_count;
    let mut search = Search {
        g1: &d1,
        g2: &d2,
        mode,
        image: vec![None; order.len()],
        order,
        used: vec![false; d2.len()],
        best: trivial + 1,
    };
    search.run(0, 0);
    Ok(search.best.min(trivial) as f64)
}
