//! Synthetic rectilinear plans for tests, benchmarks and codebook corpora.
//!
//! A bounding rectangle is cut by guillotine splits; one corner piece may be
//! dropped to notch the outline. Room masks stay clear of the outline's wall
//! band and keep a 1-px gap to the room on their right and below, so a
//! rendered plan shows every room as its own component.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::RASTER_SIDE;
use crate::graph::{extract_adjacency, DEFAULT_WALL_PX};
use crate::mask::Mask;
use crate::model::{Edge, FloorPlan, Room, RoomCategory};
use crate::postproc::morph::erode_by;
use crate::raster::{render, resize_nearest_to, LayoutRaster, DEFAULT_WALL_THICKNESS};

/// Smallest side of a guillotine piece, wall band included.
pub const MIN_PIECE_SIDE: usize = 36;
pub const MIN_ROOMS: usize = 3;
pub const MAX_ROOMS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Piece {
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

impl Piece {
    fn split(self, rng: &mut ChaCha8Rng) -> Option<(Piece, Piece)> {
        let vertical = if self.w >= 2 * MIN_PIECE_SIDE && self.h >= 2 * MIN_PIECE_SIDE {
            self.w >= self.h
        } else if self.w >= 2 * MIN_PIECE_SIDE {
            true
        } else if self.h >= 2 * MIN_PIECE_SIDE {
            false
        } else {
            return None;
        };
        let side = if vertical { self.w } else { self.h };
        let cut = rng.gen_range(MIN_PIECE_SIDE..=side - MIN_PIECE_SIDE);
        Some(if vertical {
            (Piece { w: cut, ..self }, Piece { x: self.x + cut, w: self.w - cut, ..self })
        } else {
            (Piece { h: cut, ..self }, Piece { y: self.y + cut, h: self.h - cut, ..self })
        })
    }

    fn mask(self) -> Mask {
        Mask::rect(RASTER_SIDE, RASTER_SIDE, self.x, self.y, self.w, self.h)
    }
}

fn partition(frame: Piece, count: usize, rng: &mut ChaCha8Rng) -> Vec<Piece> {
    let mut pieces = vec![frame];
    while pieces.len() < count {
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(pieces[i].w * pieces[i].h));
        let Some((i, (a, b))) = order.into_iter().find_map(|i| Some((i, pieces[i].split(rng)?))) else {
            break;
        };
        pieces[i] = a;
        pieces.insert(i + 1, b);
    }
    pieces
}

/// A plan with `rooms` rooms (clamped to 3..=8), deterministic in `seed`.
pub fn synth_plan(seed: u64, rooms: usize) -> FloorPlan {
    let rooms = rooms.clamp(MIN_ROOMS, MAX_ROOMS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = rng.gen_range(8..40);
    let y0 = rng.gen_range(8..40);
    let frame = Piece { x: x0, y: y0, w: rng.gen_range(216..248) - x0, h: rng.gen_range(216..248) - y0 };
    let notch = rooms >= 4 && rng.gen_bool(0.5);
    let mut pieces = partition(frame, rooms + notch as usize, &mut rng);
    if notch && pieces.len() > rooms {
        let corner = |p: &Piece| {
            (p.x == frame.x || p.x + p.w == frame.x + frame.w) && (p.y == frame.y || p.y + p.h == frame.y + frame.h)
        };
        let corners: Vec<usize> = (0..pieces.len()).filter(|&i| corner(&pieces[i])).collect();
        let drop = corners[rng.gen_range(0..corners.len())];
        pieces.remove(drop);
    }

    let outline = pieces.iter().fold(Mask::new(RASTER_SIDE, RASTER_SIDE), |m, p| m.or(&p.mask()));
    let interior = erode_by(&outline, DEFAULT_WALL_THICKNESS);
    let mut plan = FloorPlan { outline: Some(outline), ..FloorPlan::default() };
    for (i, p) in pieces.iter().enumerate() {
        let gap = Piece {
            w: p.w - (p.x + p.w < frame.x + frame.w) as usize,
            h: p.h - (p.y + p.h < frame.y + frame.h) as usize,
            ..*p
        };
        let mask = gap.mask().and(&interior);
        let category = RoomCategory::ALL[rng.gen_range(0..RoomCategory::ALL.len())];
        plan.rooms.push(Room::from_mask(i as u32, category, mask).expect("pieces are wider than the wall band"));
    }
    let masks: Vec<(RoomCategory, Mask)> =
        plan.rooms.iter().map(|r| (r.category, r.mask.clone().expect("synthetic rooms have masks"))).collect();
    for &(a, b, relation) in &extract_adjacency(&masks, DEFAULT_WALL_PX).edges {
        let (ca, cb) = (plan.rooms[a as usize].category, plan.rooms[b as usize].category);
        plan.edges.push(Edge { room1: a, room2: b, relation, text: format!("{ca} is {relation} {cb}") });
    }
    plan.description = format!("Synthetic layout with {} rooms.", plan.rooms.len());
    plan
}

/// A plan whose room count is drawn from 3..=8.
pub fn random_plan(seed: u64) -> FloorPlan {
    let count = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15).gen_range(MIN_ROOMS..=MAX_ROOMS);
    synth_plan(seed, count)
}

/// A degraded rendering of `plan`: jittered colors, salt noise on about 1%
/// of pixels, gray smudges, and in half the cases a 2× upscale.
pub fn noisy_raster(plan: &FloorPlan, seed: u64) -> LayoutRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = render(plan, seed | 1).expect("synthetic plans render");
    if rng.gen_bool(0.5) {
        r = resize_nearest_to(&r, 2 * RASTER_SIDE, 2 * RASTER_SIDE).expect("nonempty raster");
    }
    let (w, h) = (r.width(), r.height());
    for _ in 0..w * h / 100 {
        let (x, y) = (rng.gen_range(0..w), rng.gen_range(0..h));
        r.set(x, y, [rng.gen(), rng.gen(), rng.gen()]);
    }
    for _ in 0..4 {
        let (x, y) = (rng.gen_range(0..w - 4), rng.gen_range(0..h - 4));
        let v: u8 = rng.gen_range(100..160);
        for dy in 0..3 {
            for dx in 0..3 {
                r.set(x + dx, y + dy, [v, v, v]);
            }
        }
    }
    r
}
