//! Scores for structured plan predictions.

use serde::Serialize;

use super::matching::match_rooms;
use crate::graph::{jaccard, AdjacencyGraph};
use crate::json::parse_canonical_json;
use crate::model::FloorPlan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnderstandingScore {
    pub success: f64,
    pub rmr: f64,
    pub loc_acc: f64,
    pub area_diff_m2: f64,
    pub adj_acc: f64,
    pub rel_acc: f64,
}

impl UnderstandingScore {
    /// Score of a prediction that failed to parse.
    pub fn failed(gt: &FloorPlan) -> Self {
        let n = gt.rooms.len();
        let area = if n == 0 { 0.0 } else { gt.rooms.iter().map(|r| r.area_m2).sum::<f64>() / n as f64 };
        Self { success: 0.0, rmr: 0.0, loc_acc: 0.0, area_diff_m2: area, adj_acc: 0.0, rel_acc: 0.0 }
    }
}

/// Scores a parsed prediction. Rooms pair by legend color and centroid;
/// unmatched gt rooms count as misses and contribute their full area.
pub fn understanding_score(pred: &FloorPlan, gt: &FloorPlan) -> UnderstandingScore {
    let n = gt.rooms.len();
    let m = match_rooms(&pred.rooms, &gt.rooms);
    let (rmr, loc_acc, area_diff_m2) = if n == 0 {
        (1.0, 1.0, 0.0)
    } else {
        let located = m.pairs.iter().filter(|&&(p, g)| pred.rooms[p].position == gt.rooms[g].position).count();
        let diff: f64 = m.pairs.iter().map(|&(p, g)| (pred.rooms[p].area_m2 - gt.rooms[g].area_m2).abs()).sum::<f64>()
            + m.unmatched_gt.iter().map(|&g| gt.rooms[g].area_m2).sum::<f64>();
        (m.pairs.len() as f64 / n as f64, located as f64 / n as f64, diff / n as f64)
    };
    let pg = AdjacencyGraph::from_plan(pred);
    let gg = AdjacencyGraph::from_plan(gt);
    let adj_acc = jaccard(&pg.edge_keys(), &gg.edge_keys());
    let rel_acc = if gg.edges.is_empty() {
        1.0
    } else {
        let pos = |idx: u32| gt.rooms.iter().position(|r| r.idx == idx);
        let hits = gg
            .edges
            .iter()
            .filter(|&&(a, b, rel)| {
                let (Some(ga), Some(gb)) = (pos(a), pos(b)) else { return false };
                let (Some(pa), Some(pb)) = (m.pred_for(ga), m.pred_for(gb)) else { return false };
                pg.relation(pred.rooms[pa].idx, pred.rooms[pb].idx) == Some(rel)
            })
            .count();
        hits as f64 / gg.edges.len() as f64
    };
    UnderstandingScore { success: 1.0, rmr, loc_acc, area_diff_m2, adj_acc, rel_acc }
}

/// Parses a model answer and scores it; unparsable or invalid answers get
/// [`UnderstandingScore::failed`].
pub fn understanding_from_text(pred_text: &str, gt: &FloorPlan) -> UnderstandingScore {
    match parse_canonical_json(pred_text) {
        Ok(pred) if pred.validate().is_empty() => understanding_score(&pred, gt),
        _ => UnderstandingScore::failed(gt),
    }
}
