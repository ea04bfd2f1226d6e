//! Plan → color-coded layout raster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ColorLegend, LayoutRaster, Rgb};
use crate::geometry::RASTER_SIDE;
use crate::model::FloorPlan;
use crate::postproc::morph::erode_by;

/// Outer wall thickness in pixels.
pub const DEFAULT_WALL_THICKNESS: usize = 3;
/// Per-channel bound of the color jitter.
pub const JITTER_MAX: i32 = 6;

const WHITE: Rgb = [255, 255, 255];
const BLACK: Rgb = [0, 0, 0];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("plan has no outline mask")]
    MissingOutline,
    #[error("room {0} has no mask")]
    MissingMask(u32),
    #[error("mask of {0} is not {RASTER_SIDE}x{RASTER_SIDE}")]
    BadMaskSize(String),
}

/// Renders with the default wall thickness.
pub fn render(plan: &FloorPlan, jitter_seed: u64) -> Result<LayoutRaster, RenderError> {
    render_with(plan, jitter_seed, DEFAULT_WALL_THICKNESS)
}

/// Paints rooms largest-first in legend colors (jittered unless the seed is
/// zero), separates neighboring rooms with 1-px white lines, and strokes the
/// outline's inner rim black. Everything else is white.
pub fn render_with(plan: &FloorPlan, jitter_seed: u64, wall_thickness: usize) -> Result<LayoutRaster, RenderError> {
    let outline = plan.outline.as_ref().ok_or(RenderError::MissingOutline)?;
    if outline.width() != RASTER_SIDE || outline.height() != RASTER_SIDE {
        return Err(RenderError::BadMaskSize("outline".into()));
    }
    let mut order = Vec::with_capacity(plan.rooms.len());
    for (i, room) in plan.rooms.iter().enumerate() {
        let mask = room.mask.as_ref().ok_or(RenderError::MissingMask(room.idx))?;
        if !mask.same_shape(outline) {
            return Err(RenderError::BadMaskSize(format!("room {}", room.idx)));
        }
        order.push((i, mask.count()));
    }
    order.sort_by_key(|&(_, px)| std::cmp::Reverse(px));

    let n = RASTER_SIDE * RASTER_SIDE;
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for &(i, _) in &order {
        let mask = plan.rooms[i].mask.as_ref().expect("checked above");
        for (p, slot) in owner.iter_mut().enumerate() {
            if mask.get_index(p) {
                *slot = Some(i);
            }
        }
    }

    let legend = ColorLegend::standard();
    let colors: Vec<Rgb> = plan.rooms.iter().map(|r| jitter(legend.rgb(r.color_class()), jitter_seed, r.idx)).collect();

    let mut raster = LayoutRaster::filled(RASTER_SIDE, RASTER_SIDE, WHITE);
    let w = RASTER_SIDE;
    for (p, px) in raster.pixels_mut().iter_mut().enumerate() {
        let Some(a) = owner[p] else { continue };
        let (x, y) = (p % w, p / w);
        let right = (x + 1 < w).then(|| owner[p + 1]).flatten();
        let down = (y + 1 < w).then(|| owner[p + w]).flatten();
        let seam = right.is_some_and(|b| b != a) || down.is_some_and(|b| b != a);
        *px = if seam { WHITE } else { colors[a] };
    }

    let interior = erode_by(outline, wall_thickness);
    for (p, px) in raster.pixels_mut().iter_mut().enumerate() {
        if outline.get_index(p) && !interior.get_index(p) {
            *px = BLACK;
        }
    }
    Ok(raster)
}

fn jitter(base: Rgb, seed: u64, idx: u32) -> Rgb {
    if seed == 0 {
        return base;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    base.map(|c| (c as i32 + rng.gen_range(-JITTER_MAX..=JITTER_MAX)).clamp(0, 255) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::Mask;
    use crate::model::{Room, RoomCategory};
    use crate::raster::classify_pixels;

    fn plan(rooms: Vec<(RoomCategory, Mask)>, outline: Mask) -> FloorPlan {
        FloorPlan {
            outline: Some(outline),
            rooms: rooms.into_iter().enumerate().map(|(i, (c, m))| Room::from_mask(i as u32, c, m).unwrap()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn single_room_interior_is_legend_color() {
        let outline = Mask::rect(256, 256, 20, 20, 200, 200);
        let p = plan(vec![(RoomCategory::Kitchen, outline.clone())], outline);
        let r = render(&p, 0).unwrap();
        let salmon = [240, 128, 128];
        for y in 23..217 {
            for x in 23..217 {
                assert_eq!(r.get(x, y), salmon);
            }
        }
        assert_eq!(r.get(20, 100), BLACK);
        assert_eq!(r.get(22, 100), BLACK);
        assert_eq!(r.get(19, 100), WHITE);
    }

    #[test]
    fn larger_room_painted_first() {
        let outline = Mask::rect(256, 256, 0, 0, 256, 256);
        let big = Mask::rect(256, 256, 10, 10, 200, 200);
        let small = Mask::rect(256, 256, 50, 50, 20, 20);
        // Small room listed first; it must still end up on top.
        let p = plan(vec![(RoomCategory::Bathroom, small), (RoomCategory::LivingRoom, big)], outline);
        let r = render(&p, 0).unwrap();
        assert_eq!(r.get(60, 60), [173, 216, 210]);
        assert_eq!(r.get(100, 100), [238, 232, 170]);
    }

    #[test]
    fn deterministic_and_bounded_jitter() {
        let outline = Mask::rect(256, 256, 20, 20, 200, 200);
        let p = plan(
            vec![
                (RoomCategory::Kitchen, Mask::rect(256, 256, 20, 20, 100, 200)),
                (RoomCategory::MasterRoom, Mask::rect(256, 256, 120, 20, 100, 200)),
            ],
            outline,
        );
        let a = render(&p, 42).unwrap();
        assert_eq!(a, render(&p, 42).unwrap());
        assert_ne!(a, render(&p, 0).unwrap());
        let labels = classify_pixels(&a, &ColorLegend::standard());
        assert_eq!(labels, classify_pixels(&render(&p, 0).unwrap(), &ColorLegend::standard()));
    }

    #[test]
    fn separator_between_rooms() {
        let outline = Mask::rect(256, 256, 20, 20, 200, 200);
        let p = plan(
            vec![
                (RoomCategory::Kitchen, Mask::rect(256, 256, 20, 20, 100, 200)),
                (RoomCategory::Kitchen, Mask::rect(256, 256, 120, 20, 100, 200)),
            ],
            outline,
        );
        let r = render(&p, 0).unwrap();
        assert_eq!(r.get(119, 100), WHITE);
        assert_eq!(r.get(118, 100), [240, 128, 128]);
        assert_eq!(r.get(120, 100), [240, 128, 128]);
    }

    #[test]
    fn missing_mask_rejected() {
        let mut p = plan(vec![(RoomCategory::Kitchen, Mask::rect(256, 256, 0, 0, 9, 9))], Mask::full(256, 256));
        p.rooms[0].mask = None;
        assert_eq!(render(&p, 0), Err(RenderError::MissingMask(0)));
        p.outline = None;
        assert_eq!(render(&p, 0), Err(RenderError::MissingOutline));
    }
}
