//! Pairing predicted rooms with ground-truth rooms.

use crate::model::Room;

/// Cost added when two rooms have different legend colors.
pub const CLASS_MISMATCH_COST: f64 = 10.0;

/// Indices are positions in the room slices passed to [`match_rooms`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoomMatching {
    /// `(pred, gt)` pairs ordered by gt position.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

impl RoomMatching {
    /// Predicted position matched to gt position `g`.
    pub fn pred_for(&self, g: usize) -> Option<usize> {
        self.pairs.iter().find(|&&(_, gg)| gg == g).map(|&(p, _)| p)
    }
}

/// Matching cost of one pair: class mismatch penalty plus centroid distance
/// in raster widths.
pub fn pair_cost(p: &Room, g: &Room) -> f64 {
    let (a, b) = (p.anchor_px(), g.anchor_px());
    let mismatch = if p.color_class() == g.color_class() { 0.0 } else { CLASS_MISMATCH_COST };
    mismatch + (a.0 - b.0).hypot(a.1 - b.1) / crate::geometry::RASTER_SIDE as f64
}

/// Minimum-cost assignment of a rectangular cost matrix with
/// `rows <= cols`; returns the column of each row.
pub(crate) fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // 1-based potentials formulation
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; m + 1]);
    let (mut p, mut way) = (vec![0usize; m + 1], vec![0usize; m + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let (mut delta, mut j1) = (f64::INFINITY, 0);
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Minimum-cost pairing under [`pair_cost`]; pairs costing
/// [`CLASS_MISMATCH_COST`] or more are dropped, so rooms only pair within
/// their legend color.
pub fn match_rooms(pred: &[Room], gt: &[Room]) -> RoomMatching {
    let mut pairs = Vec::new();
    for class in crate::model::ColorClass::ALL {
        let ps: Vec<usize> = (0..pred.len()).filter(|&i| pred[i].color_class() == class).collect();
        let gs: Vec<usize> = (0..gt.len()).filter(|&i| gt[i].color_class() == class).collect();
        if ps.is_empty() || gs.is_empty() {
            continue;
        }
        let cost = |a: usize, b: usize| pair_cost(&pred[ps[a]], &gt[gs[b]]);
        if ps.len() <= gs.len() {
            let m: Vec<Vec<f64>> = (0..ps.len()).map(|a| (0..gs.len()).map(|b| cost(a, b)).collect()).collect();
            for (a, b) in hungarian(&m).into_iter().enumerate() {
                pairs.push((ps[a], gs[b]));
            }
        } else {
            let m: Vec<Vec<f64>> = (0..gs.len()).map(|b| (0..ps.len()).map(|a| cost(a, b)).collect()).collect();
            for (b, a) in hungarian(&m).into_iter().enumerate() {
                pairs.push((ps[a], gs[b]));
            }
        }
    }
    pairs.retain(|&(p, g)| pair_cost(&pred[p], &gt[g]) < CLASS_MISMATCH_COST);
    pairs.sort_by_key(|&(_, g)| g);
    let unmatched_pred = (0..pred.len()).filter(|p| !pairs.iter().any(|x| x.0 == *p)).collect();
    let unmatched_gt = (0..gt.len()).filter(|g| !pairs.iter().any(|x| x.1 == *g)).collect();
    RoomMatching { pairs, unmatched_pred, unmatched_gt }
}
