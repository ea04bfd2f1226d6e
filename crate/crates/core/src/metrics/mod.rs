//! Understanding, generation and editing scores.

mod editing;
mod frechet;
mod matching;
mod pixel;
mod understanding;

use serde::Serialize;

use crate::graph::{
    edge_overlap, extract_adjacency, graph_edit_distance, node_f1, AdjacencyGraph, EdgeCostMode, GedError,
    NodeMatchMode, DEFAULT_WALL_PX,
};
use crate::mask::Mask;
use crate::raster::{classify_pixels, extract_room_masks, ColorLegend, LabelMap, LayoutRaster, MIN_ROOM_PX};
use crate::scalar::Scalar;

pub use editing::{change_map, default_wall_mask, delta_scores};
pub use frechet::{frechet_distance, FeatureSet, PSD_TOLERANCE};
pub use matching::{match_rooms, pair_cost, RoomMatching, CLASS_MISMATCH_COST};
pub use pixel::{luminance, macro_iou, micro_iou, mse, per_class_iou, psnr, ssim, ssim_plane};
pub use understanding::{understanding_from_text, understanding_score, UnderstandingScore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("inputs have different shapes")]
    ShapeMismatch,
    #[error("feature dimensions differ")]
    DimensionMismatch,
    #[error("covariance is not positive semidefinite (eigenvalue {0})")]
    NonPsdCovariance(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error(transparent)]
    Ged(#[from] GedError),
    #[error("{0}")]
    Io(String),
}

/// Knobs shared by the structural parts of generation scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureOptions {
    pub wall_px: usize,
    pub min_room_px: usize,
    pub edge_cost: EdgeCostMode,
    pub node_mode: NodeMatchMode,
}

impl Default for StructureOptions {
    fn default() -> Self {
        Self {
            wall_px: DEFAULT_WALL_PX,
            min_room_px: MIN_ROOM_PX,
            edge_cost: EdgeCostMode::default(),
            node_mode: NodeMatchMode::default(),
        }
    }
}

/// Adjacency graph recovered from a label map; each room component becomes
/// a node typed by its color's canonical category.
pub fn graph_from_labels(labels: &LabelMap, opts: &StructureOptions) -> AdjacencyGraph {
    let masks: Vec<_> = extract_room_masks(labels, opts.min_room_px)
        .into_iter()
        .filter_map(|(c, m)| Some((c.canonical_category()?, m)))
        .collect();
    extract_adjacency(&masks, opts.wall_px)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationScore {
    pub micro_iou: f64,
    pub macro_iou: f64,
    pub ssim: f64,
    /// `f64::INFINITY` for identical rasters.
    pub psnr_db: f64,
    pub ged: f64,
    pub node_f1: f64,
    pub edge_overlap: f64,
}

/// Scores a generated raster against ground truth. Both are expected to
/// have passed the post-processing pipeline already.
pub fn generation_score(
    pred: &LayoutRaster,
    gt: &LayoutRaster,
    opts: &StructureOptions,
) -> Result<GenerationScore, MetricError> {
    pred.check_shape(gt).map_err(|_| MetricError::ShapeMismatch)?;
    let legend = ColorLegend::standard();
    let (pl, gl) = (classify_pixels(pred, &legend), classify_pixels(gt, &legend));
    let (pg, gg) = (graph_from_labels(&pl, opts), graph_from_labels(&gl, opts));
    Ok(GenerationScore {
        micro_iou: micro_iou(&pl, &gl)?,
        macro_iou: macro_iou(&pl, &gl)?,
        ssim: ssim(pred, gt)?,
        psnr_db: psnr(pred, gt)?,
        ged: graph_edit_distance(&pg, &gg, opts.edge_cost)?,
        node_f1: node_f1(&pg, &gg, opts.node_mode),
        edge_overlap: edge_overlap(&pg, &gg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EditingScore {
    pub delta_iou: f64,
    pub delta_mse: f64,
    /// Post-edit layout against the ground-truth post-edit layout.
    pub generation: GenerationScore,
}

/// Edit precision plus generation quality of the edited layout. `wall`
/// defaults to [`default_wall_mask`].
pub fn editing_score(
    before: &LabelMap,
    pred_after: &LabelMap,
    gt_after: &LabelMap,
    wall: Option<&Mask>,
    opts: &StructureOptions,
) -> Result<EditingScore, MetricError> {
    let own;
    let wall = match wall {
        Some(w) => w,
        None => {
            own = default_wall_mask(pred_after, gt_after)?;
            &own
        }
    };
    let (delta_iou, delta_mse) = delta_scores(before, pred_after, gt_after, wall)?;
    let legend = ColorLegend::standard();
    let generation = generation_score(&pred_after.recolor(&legend), &gt_after.recolor(&legend), opts)?;
    Ok(EditingScore { delta_iou, delta_mse, generation })
}

/// Sample Pearson correlation.
pub fn pearson_r<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::DimensionMismatch);
    }
    if xs.len() < 2 {
        return Err(MetricError::DegenerateInput("need at least two pairs".into()));
    }
    let n = T::lit(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(MetricError::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one()))
}
