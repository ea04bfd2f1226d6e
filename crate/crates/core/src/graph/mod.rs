//! Room-adjacency graphs and the structural comparisons over them.

mod ged;
mod relation;

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::mask::Mask;
use crate::model::{ColorClass, FloorPlan, RoomCategory};
use crate::postproc::morph::dilate_by;

pub use ged::{graph_edit_distance, EdgeCostMode, GedError, MAX_GED_NODES};
pub use relation::{
    classify_position, classify_relation, position_of_centroid, RelationType, UnknownRelation, CONTAINMENT_FRACTION,
};

/// Default dilation used to bridge wall gaps between rooms.
pub const DEFAULT_WALL_PX: usize = 3;
/// Minimum overlap of the dilated masks for two rooms to be adjacent.
pub const MIN_CONTACT_PX: usize = 8;

/// Undirected simple graph of rooms. Edges are stored once with `i < j`
/// (room idx values) and the relation is expressed from `i`'s side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdjacencyGraph {
    pub nodes: Vec<(u32, RoomCategory)>,
    pub edges: Vec<(u32, u32, RelationType)>,
}

impl AdjacencyGraph {
    pub fn new(nodes: Vec<(u32, RoomCategory)>) -> Self {
        Self { nodes, edges: Vec::new() }
    }

    /// Adds an edge, normalizing orientation. Self-loops, unknown endpoints
    /// and repeated pairs are ignored; returns whether the edge was added.
    pub fn add_edge(&mut self, a: u32, b: u32, relation: RelationType) -> bool {
        if a == b || !self.has_node(a) || !self.has_node(b) {
            return false;
        }
        let (i, j, rel) = if a < b { (a, b, relation) } else { (b, a, relation.inverse()) };
        if self.edges.iter().any(|&(x, y, _)| x == i && y == j) {
            return false;
        }
        self.edges.push((i, j, rel));
        true
    }

    pub fn has_node(&self, idx: u32) -> bool {
        self.nodes.iter().any(|&(n, _)| n == idx)
    }

    pub fn category(&self, idx: u32) -> Option<RoomCategory> {
        self.nodes.iter().find(|&&(n, _)| n == idx).map(|&(_, c)| c)
    }

    /// Relation of `a` with respect to `b`, if the two are adjacent.
    pub fn relation(&self, a: u32, b: u32) -> Option<RelationType> {
        self.edges.iter().find_map(|&(i, j, r)| {
            if i == a && j == b {
                Some(r)
            } else if i == b && j == a {
                Some(r.inverse())
            } else {
                None
            }
        })
    }

    /// Graph of a plan's rooms and declared edges.
    pub fn from_plan(plan: &FloorPlan) -> Self {
        let mut g = Self::new(plan.rooms.iter().map(|r| (r.idx, r.category)).collect());
        for e in &plan.edges {
            g.add_edge(e.room1, e.room2, e.relation);
        }
        g
    }

    /// Unordered color-class pairs of the edges, duplicates collapsed.
    pub fn edge_keys(&self) -> BTreeSet<(ColorClass, ColorClass)> {
        let class: HashMap<u32, ColorClass> = self.nodes.iter().map(|&(i, c)| (i, c.color_class())).collect();
        self.edges
            .iter()
            .filter_map(|&(i, j, _)| {
                let (a, b) = (*class.get(&i)?, *class.get(&j)?);
                Some(if a <= b { (a, b) } else { (b, a) })
            })
            .collect()
    }

    /// Debug dump: `{nodes:[{idx,type}], edges:[{i,j,relation}]}`.
    pub fn to_debug_json(&self) -> String {
        #[derive(Serialize)]
        struct Node<'a> {
            idx: u32,
            #[serde(rename = "type")]
            kind: &'a str,
        }
        #[derive(Serialize)]
        struct Edge<'a> {
            i: u32,
            j: u32,
            relation: &'a str,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            nodes: Vec<Node<'a>>,
            edges: Vec<Edge<'a>>,
        }
        serde_json::to_string(&Dump {
            nodes: self.nodes.iter().map(|&(idx, c)| Node { idx, kind: c.name() }).collect(),
            edges: self.edges.iter().map(|&(i, j, r)| Edge { i, j, relation: r.as_str() }).collect(),
        })
        .expect("graph serializes")
    }
}

/// Builds the adjacency graph of disjoint room masks. Node idx values are the
/// positions in `masks`. Two rooms are adjacent when their masks, each dilated
/// by `wall_px`, share at least [`MIN_CONTACT_PX`] pixels.
pub fn extract_adjacency(masks: &[(RoomCategory, Mask)], wall_px: usize) -> AdjacencyGraph {
    let mut g = AdjacencyGraph::new(masks.iter().enumerate().map(|(i, (c, _))| (i as u32, *c)).collect());
    let grown: Vec<Mask> = masks.iter().map(|(_, m)| dilate_by(m, wall_px)).collect();
    for i in 0..masks.len() {
        for j in i + 1..masks.len() {
            if grown[i].intersection_count(&grown[j]) < MIN_CONTACT_PX {
                continue;
            }
            if let Ok(rel) = classify_relation(&masks[i].1, &masks[j].1) {
                g.add_edge(i as u32, j as u32, rel);
            }
        }
    }
    g
}

/// Whether node categories are compared as multisets or as sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeMatchMode {
    #[default]
    Multiset,
    Set,
}

/// F1 over the color classes of the nodes.
pub fn node_f1(pred: &AdjacencyGraph, gt: &AdjacencyGraph, mode: NodeMatchMode) -> f64 {
    let counts = |g: &AdjacencyGraph| {
        let mut c = [0usize; 10];
        for &(_, cat) in &g.nodes {
            c[cat.color_class().index()] += 1;
        }
        if mode == NodeMatchMode::Set {
            c.iter_mut().for_each(|v| *v = (*v).min(1));
        }
        c
    };
    let (p, g) = (counts(pred), counts(gt));
    let (np, ng): (usize, usize) = (p.iter().sum(), g.iter().sum());
    if np == 0 && ng == 0 {
        return 1.0;
    }
    if np == 0 || ng == 0 {
        return 0.0;
    }
    let inter: usize = p.iter().zip(&g).map(|(a, b)| *a.min(b)).sum();
    let precision = inter as f64 / np as f64;
    let recall = inter as f64 / ng as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Jaccard index of the color-class edge keys; relation labels are ignored.
pub fn edge_overlap(pred: &AdjacencyGraph, gt: &AdjacencyGraph) -> f64 {
    jaccard(&pred.edge_keys(), &gt.edge_keys())
}

pub(crate) fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}
