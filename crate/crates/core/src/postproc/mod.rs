//! Post-processing applied to every layout before scoring: structural
//! correction, color standardization and contour refinement.

pub mod morph;

use crate::mask::{label_components, neighbors4, Mask};
use crate::model::ColorClass;
use crate::raster::{classify_pixels, resize_nearest, ColorLegend, LabelMap, LayoutRaster, RasterError};

use morph::{close, erode_by, open, MorphKernel};

/// Pixels farther than this (RGB L2) from every legend color are undefined.
pub const GRAY_TOLERANCE: u32 = 40;
/// Passes of neighborhood voting over undefined pixels.
pub const MAX_RELABEL_PASSES: usize = 10;
/// Half-width of the voting neighborhood (5×5).
const VOTE_RADIUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub correction_enabled: bool,
    pub open_close_radius: usize,
    pub noise_component_px: usize,
    pub wall_thickness: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { correction_enabled: true, open_close_radius: 2, noise_component_px: 16, wall_thickness: 3 }
    }
}

impl PipelineConfig {
    pub fn without_correction() -> Self {
        Self { correction_enabled: false, ..Self::default() }
    }
}

/// Snaps every pixel to its nearest legend color.
pub fn standardize_colors(raster: &LayoutRaster) -> LayoutRaster {
    let legend = ColorLegend::standard();
    classify_pixels(raster, &legend).recolor(&legend)
}

fn modal(votes: &[u32; 10]) -> Option<ColorClass> {
    let (best, &n) = votes.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
    (n > 0).then(|| ColorClass::from_index(best).expect("legend index"))
}

/// Removes gray zones, specks and ragged edges.
///
/// Undefined pixels take the most common class among defined pixels of their
/// 5×5 neighborhood. Non-white components smaller than
/// `noise_component_px` take the most common class on their outer border.
/// Each room component is then opened and closed; pixels it loses become
/// white and pixels it gains are taken only from white.
pub fn structural_correction(raster: &LayoutRaster, cfg: &PipelineConfig) -> LayoutRaster {
    let legend = ColorLegend::standard();
    let (w, h) = (raster.width(), raster.height());
    let gray_tol2 = GRAY_TOLERANCE * GRAY_TOLERANCE;

    let mut labels: Vec<Option<ColorClass>> = raster
        .pixels()
        .iter()
        .map(|&p| {
            let (c, d) = legend.nearest(p);
            (d <= gray_tol2).then_some(c)
        })
        .collect();
    let mut changed = vec![false; w * h];

    for _ in 0..MAX_RELABEL_PASSES {
        let mut updates = Vec::new();
        for (p, l) in labels.iter().enumerate() {
            if l.is_some() {
                continue;
            }
            let (x, y) = (p % w, p / w);
            let mut votes = [0u32; 10];
            for ny in y.saturating_sub(VOTE_RADIUS)..(y + VOTE_RADIUS + 1).min(h) {
                for nx in x.saturating_sub(VOTE_RADIUS)..(x + VOTE_RADIUS + 1).min(w) {
                    if let Some(c) = labels[ny * w + nx] {
                        votes[c.index()] += 1;
                    }
                }
            }
            if let Some(c) = modal(&votes) {
                updates.push((p, c));
            }
        }
        if updates.is_empty() {
            break;
        }
        for (p, c) in updates {
            labels[p] = Some(c);
            changed[p] = true;
        }
    }

    // Still-undefined pixels are left to standardization.
    let mut classes: Vec<ColorClass> =
        labels.iter().zip(raster.pixels()).map(|(l, &p)| l.unwrap_or_else(|| legend.nearest(p).0)).collect();

    if cfg.noise_component_px > 1 {
        let comps = label_components(w, h, |i| {
            let c = classes[i];
            (c != ColorClass::White).then_some(c)
        });
        for (class, m) in comps {
            if m.count() >= cfg.noise_component_px {
                continue;
            }
            let mut votes = [0u32; 10];
            for (x, y) in m.iter_set() {
                for q in neighbors4(y * w + x, w, h) {
                    if !m.get_index(q) {
                        votes[classes[q].index()] += 1;
                    }
                }
            }
            let Some(fill) = modal(&votes) else { continue };
            if fill == class {
                continue;
            }
            for (x, y) in m.iter_set() {
                classes[y * w + x] = fill;
                changed[y * w + x] = true;
            }
        }
    }

    if let Ok(kernel) = MorphKernel::square(cfg.open_close_radius) {
        let comps = label_components(w, h, |i| {
            let c = classes[i];
            c.is_room().then_some(c)
        });
        for (class, m) in comps {
            let smoothed = close(&open(&m, kernel), kernel);
            for p in 0..w * h {
                let (before, after) = (m.get_index(p), smoothed.get_index(p));
                if before && !after {
                    classes[p] = ColorClass::White;
                    changed[p] = true;
                } else if !before && after && classes[p] == ColorClass::White {
                    classes[p] = class;
                    changed[p] = true;
                }
            }
        }
    }

    let mut out = raster.clone();
    for (p, px) in out.pixels_mut().iter_mut().enumerate() {
        if changed[p] {
            *px = legend.rgb(classes[p]);
        }
    }
    out
}

/// Building footprint: room and wall pixels, 1-px gaps closed, holes filled.
fn footprint(labels: &LabelMap) -> Mask {
    let solid = labels.mask_where(|c| c != ColorClass::White);
    let k = MorphKernel::square(1).expect("nonzero radius");
    solid.or(&close(&solid, k)).fill_holes()
}

/// Redraws the structure lines of a standardized raster: the footprint's
/// outer `wall_thickness` pixels become black, room pixels bordering a
/// different room class on their right or below become white, all remaining
/// non-room pixels become white.
pub fn refine_contours(raster: &LayoutRaster, cfg: &PipelineConfig) -> LayoutRaster {
    let legend = ColorLegend::standard();
    let labels = classify_pixels(raster, &legend);
    let (w, h) = (labels.width(), labels.height());
    let foot = footprint(&labels);
    let inner = erode_by(&foot, cfg.wall_thickness);
    let l = labels.labels();
    let room_at = |p: usize| inner.get_index(p) && l[p].is_room();

    let mut out = LabelMap::filled(w, h, ColorClass::White);
    for (p, slot) in out.labels_mut().iter_mut().enumerate() {
        if foot.get_index(p) && !inner.get_index(p) {
            *slot = ColorClass::Black;
            continue;
        }
        if !room_at(p) {
            continue;
        }
        let (x, y) = (p % w, p / w);
        let differs = |q: usize| room_at(q) && l[q] != l[p];
        let seam = (x + 1 < w && differs(p + 1)) || (y + 1 < h && differs(p + w));
        if !seam {
            *slot = l[p];
        }
    }
    out.recolor(&legend)
}

/// Upper bound on correction/standardize/refine rounds inside one pipeline
/// run. Each round after the first only repairs what the previous round's
/// re-stroking exposed.
pub const MAX_PIPELINE_ROUNDS: usize = 8;

/// Resize, then correction (when enabled), standardization and contour
/// refinement, repeated until the layout stops changing.
pub fn run_pipeline(raster: &LayoutRaster, cfg: &PipelineConfig) -> Result<LayoutRaster, RasterError> {
    let mut cur = resize_nearest(raster)?;
    for _ in 0..MAX_PIPELINE_ROUNDS {
        let next = pipeline_round(&cur, cfg);
        if next == cur {
            break;
        }
        cur = next;
    }
    Ok(cur)
}

fn pipeline_round(raster: &LayoutRaster, cfg: &PipelineConfig) -> LayoutRaster {
    let corrected;
    let input = if cfg.correction_enabled {
        corrected = structural_correction(raster, cfg);
        &corrected
    } else {
        raster
    };
    refine_contours(&standardize_colors(input), cfg)
}
