//! Edit-precision scores over change maps.

use super::MetricError;
use crate::mask::Mask;
use crate::model::ColorClass;
use crate::postproc::morph::dilate_by;
use crate::raster::LabelMap;

/// Pixels whose class differs between `after` and `before`, outside `wall`.
pub fn change_map(before: &LabelMap, after: &LabelMap, wall: &Mask) -> Result<Mask, MetricError> {
    before.check_shape(after).map_err(|_| MetricError::ShapeMismatch)?;
    if wall.width() != before.width() || wall.height() != before.height() {
        return Err(MetricError::ShapeMismatch);
    }
    let (w, h) = (before.width(), before.height());
    let (b, a) = (before.labels(), after.labels());
    Ok(Mask::from_fn(w, h, |x, y| {
        let i = y * w + x;
        a[i] != b[i] && !wall.get_index(i)
    }))
}

/// Black and white pixels of both after-images, dilated by one pixel.
pub fn default_wall_mask(pred_after: &LabelMap, gt_after: &LabelMap) -> Result<Mask, MetricError> {
    pred_after.check_shape(gt_after).map_err(|_| MetricError::ShapeMismatch)?;
    let lines = |l: &LabelMap| l.mask_where(|c| matches!(c, ColorClass::Black | ColorClass::White));
    Ok(dilate_by(&lines(pred_after).or(&lines(gt_after)), 1))
}

/// `(ΔIoU, ΔMSE)`: Jaccard of the two change maps (1 when both are empty)
/// and the fraction of non-wall pixels where they disagree.
pub fn delta_scores(
    before: &LabelMap,
    pred_after: &LabelMap,
    gt_after: &LabelMap,
    wall: &Mask,
) -> Result<(f64, f64), MetricError> {
    let pred = change_map(before, pred_after, wall)?;
    let gt = change_map(before, gt_after, wall)?;
    let union = pred.union_count(&gt);
    let delta_iou = if union == 0 { 1.0 } else { pred.intersection_count(&gt) as f64 / union as f64 };
    let free = wall.bits().len() - wall.count();
    let disagree = union - pred.intersection_count(&gt);
    let delta_mse = if free == 0 { 0.0 } else { disagree as f64 / free as f64 };
    Ok((delta_iou, delta_mse))
}
