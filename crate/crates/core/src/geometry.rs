//! World ↔ raster geometry of the fixed 18 m × 18 m layout frame.

use crate::mask::Mask;

/// Side of the square world frame in meters.
pub const WORLD_SIDE_M: f64 = 18.0;
/// Side of the square layout raster in pixels.
pub const RASTER_SIDE: usize = 256;
/// Meters covered by one raster pixel.
pub const METERS_PER_PIXEL: f64 = WORLD_SIDE_M / RASTER_SIDE as f64;
/// Square meters covered by one raster pixel.
pub const M2_PER_PIXEL: f64 = METERS_PER_PIXEL * METERS_PER_PIXEL;

/// Geometry of the world frame. The values are fixed; the type exists so the
/// conversions travel together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldGeometry {
    pub world_side: f64,
    pub raster_side: usize,
    pub meters_per_pixel: f64,
}

impl Default for WorldGeometry {
    fn default() -> Self {
        Self { world_side: WORLD_SIDE_M, raster_side: RASTER_SIDE, meters_per_pixel: METERS_PER_PIXEL }
    }
}

impl WorldGeometry {
    pub fn pixels_to_m2(&self, pixel_count: usize) -> f64 {
        pixel_count as f64 * self.meters_per_pixel * self.meters_per_pixel
    }

    pub fn pixels_to_m(&self, pixels: usize) -> f64 {
        pixels as f64 * self.meters_per_pixel
    }
}

/// Geometry derived from a room mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedGeometry {
    pub area_m2: f64,
    pub width_m: f64,
    pub height_m: f64,
    /// Mean (x, y) of the set pixels, in pixel coordinates.
    pub centroid_px: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("mask has no set pixels")]
pub struct EmptyMask;

/// Area, bounding-box extents and centroid of a nonempty mask.
pub fn derive_geometry(mask: &Mask) -> Result<DerivedGeometry, EmptyMask> {
    let geo = WorldGeometry::default();
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (usize::MAX, usize::MAX, 0, 0);
    let (mut sx, mut sy, mut n) = (0u64, 0u64, 0usize);
    for (x, y) in mask.iter_set() {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
        sx += x as u64;
        sy += y as u64;
        n += 1;
    }
    if n == 0 {
        return Err(EmptyMask);
    }
    Ok(DerivedGeometry {
        area_m2: geo.pixels_to_m2(n),
        width_m: geo.pixels_to_m(max_x - min_x + 1),
        height_m: geo.pixels_to_m(max_y - min_y + 1),
        centroid_px: (sx as f64 / n as f64, sy as f64 / n as f64),
    })
}
