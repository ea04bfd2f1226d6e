//! Pixel-level comparisons of label maps and rasters.

use super::MetricError;
use crate::model::ColorClass;
use crate::raster::{LabelMap, LayoutRaster};

const SSIM_RADIUS: usize = 5;
const SSIM_SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn check_labels(a: &LabelMap, b: &LabelMap) -> Result<(), MetricError> {
    a.check_shape(b).map_err(|_| MetricError::ShapeMismatch)
}

fn check_rasters(a: &LayoutRaster, b: &LayoutRaster) -> Result<(), MetricError> {
    a.check_shape(b).map_err(|_| MetricError::ShapeMismatch)
}

/// Intersection and union pixel counts per room color class.
fn class_counts(pred: &LabelMap, gt: &LabelMap) -> [(usize, usize); 8] {
    let mut out = [(0, 0); 8];
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        for (slot, class) in ColorClass::ROOMS.iter().enumerate() {
            let (a, b) = (p == *class, g == *class);
            out[slot].0 += (a && b) as usize;
            out[slot].1 += (a || b) as usize;
        }
    }
    out
}

/// IoU of every room color class present in either map.
pub fn per_class_iou(pred: &LabelMap, gt: &LabelMap) -> Result<Vec<(ColorClass, f64)>, MetricError> {
    check_labels(pred, gt)?;
    Ok(class_counts(pred, gt)
        .iter()
        .zip(ColorClass::ROOMS)
        .filter(|((_, u), _)| *u > 0)
        .map(|(&(i, u), c)| (c, i as f64 / u as f64))
        .collect())
}

/// Pooled intersection over pooled union across room classes.
pub fn micro_iou(pred: &LabelMap, gt: &LabelMap) -> Result<f64, MetricError> {
    check_labels(pred, gt)?;
    let (i, u) = class_counts(pred, gt).iter().fold((0, 0), |a, &(i, u)| (a.0 + i, a.1 + u));
    Ok(if u == 0 { 1.0 } else { i as f64 / u as f64 })
}

/// Mean of per-class IoU over classes present in either map.
pub fn macro_iou(pred: &LabelMap, gt: &LabelMap) -> Result<f64, MetricError> {
    let per = per_class_iou(pred, gt)?;
    Ok(if per.is_empty() { 1.0 } else { per.iter().map(|(_, v)| v).sum::<f64>() / per.len() as f64 })
}

/// `0.299 R + 0.587 G + 0.114 B` per pixel.
pub fn luminance(r: &LayoutRaster) -> Vec<f64> {
    r.pixels().iter().map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).collect()
}

fn gaussian(radius: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Gaussian-weighted sums over every fully contained window.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let span = k.len();
    let (ow, oh) = (w + 1 - span, h + 1 - span);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = k.iter().enumerate().map(|(t, kv)| kv * src[y * w + x + t]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(t, kv)| kv * rows[(y + t) * ow + x]).sum();
        }
    }
    out
}

/// Mean windowed SSIM of two single-channel images with 0–255 range.
/// Images smaller than the 11×11 window use the largest window that fits.
pub fn ssim_plane(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    assert_eq!(a.len(), w * h);
    assert_eq!(b.len(), w * h);
    if w == 0 || h == 0 {
        return 1.0;
    }
    let radius = SSIM_RADIUS.min((w.min(h) - 1) / 2);
    let k = gaussian(radius);
    let prod = |f: &dyn Fn(usize) -> f64| (0..w * h).map(f).collect::<Vec<f64>>();
    let mx = filter_valid(a, w, h, &k);
    let my = filter_valid(b, w, h, &k);
    let xx = filter_valid(&prod(&|i| a[i] * a[i]), w, h, &k);
    let yy = filter_valid(&prod(&|i| b[i] * b[i]), w, h, &k);
    let xy = filter_valid(&prod(&|i| a[i] * b[i]), w, h, &k);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let sx = xx[i] - ux * ux;
            let sy = yy[i] - uy * uy;
            let sxy = xy[i] - ux * uy;
            ((2.0 * ux * uy + C1) * (2.0 * sxy + C2)) / ((ux * ux + uy * uy + C1) * (sx + sy + C2))
        })
        .sum();
    total / mx.len() as f64
}

/// Windowed SSIM over luminance.
pub fn ssim(pred: &LayoutRaster, gt: &LayoutRaster) -> Result<f64, MetricError> {
    check_rasters(pred, gt)?;
    Ok(ssim_plane(&luminance(pred), &luminance(gt), pred.width(), pred.height()))
}

/// Mean squared error over all pixels and channels.
pub fn mse(pred: &LayoutRaster, gt: &LayoutRaster) -> Result<f64, MetricError> {
    check_rasters(pred, gt)?;
    let n = pred.pixels().len() * 3;
    let sum: f64 = pred
        .pixels()
        .iter()
        .zip(gt.pixels())
        .flat_map(|(p, g)| (0..3).map(move |c| (p[c] as f64 - g[c] as f64).powi(2)))
        .sum();
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// PSNR with peak 255; identical images give `f64::INFINITY`.
pub fn psnr(pred: &LayoutRaster, gt: &LayoutRaster) -> Result<f64, MetricError> {
    let m = mse(pred, gt)?;
    Ok(if m == 0.0 { f64::INFINITY } else { 10.0 * (255.0 * 255.0 / m).log10() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(f: impl Fn(usize, usize) -> ColorClass) -> LabelMap {
        let mut l = LabelMap::filled(64, 64, ColorClass::White);
        for y in 0..64 {
            for x in 0..64 {
                l.set(x, y, f(x, y));
            }
        }
        l
    }

    #[test]
    fn iou_hand_values() {
        let all = labels(|_, _| ColorClass::LightKhaki);
        let half = labels(|x, _| if x < 32 { ColorClass::LightKhaki } else { ColorClass::White });
        assert_eq!(micro_iou(&all, &half).unwrap(), 0.5);
        assert_eq!(macro_iou(&all, &half).unwrap(), 0.5);
        assert_eq!(micro_iou(&all, &all).unwrap(), 1.0);
        let other = labels(|_, _| ColorClass::Orange);
        assert_eq!(micro_iou(&all, &other).unwrap(), 0.0);
        assert_eq!(macro_iou(&all, &other).unwrap(), 0.0);
        let walls = labels(|_, _| ColorClass::Black);
        assert_eq!(micro_iou(&walls, &walls).unwrap(), 1.0);
        assert_eq!(macro_iou(&walls, &labels(|_, _| ColorClass::White)).unwrap(), 1.0);
    }

    #[test]
    fn micro_between_class_extremes() {
        let a = labels(|x, y| {
            if x < 40 {
                ColorClass::LightKhaki
            } else if y < 10 {
                ColorClass::Orange
            } else {
                ColorClass::White
            }
        });
        let b = labels(|x, y| {
            if x < 30 {
                ColorClass::LightKhaki
            } else if y < 30 {
                ColorClass::Orange
            } else {
                ColorClass::White
            }
        });
        let per = per_class_iou(&a, &b).unwrap();
        let micro = micro_iou(&a, &b).unwrap();
        let lo = per.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = per.iter().map(|p| p.1).fold(0.0, f64::max);
        assert!(lo <= micro && micro <= hi);
        assert_eq!(micro, micro_iou(&b, &a).unwrap());
    }

    #[test]
    fn shape_mismatch() {
        let a = LabelMap::filled(4, 4, ColorClass::White);
        let b = LabelMap::filled(4, 5, ColorClass::White);
        assert_eq!(micro_iou(&a, &b), Err(MetricError::ShapeMismatch));
        let r = LayoutRaster::filled(3, 3, [0; 3]);
        assert_eq!(psnr(&r, &LayoutRaster::filled(3, 4, [0; 3])), Err(MetricError::ShapeMismatch));
    }

    #[test]
    fn psnr_hand_values() {
        let a = LayoutRaster::filled(32, 32, [100, 100, 100]);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = LayoutRaster::filled(32, 32, [101, 101, 101]);
        assert!((psnr(&a, &b).unwrap() - 20.0 * 255f64.log10()).abs() < 1e-12);
        assert!((psnr(&a, &b).unwrap() - 48.13).abs() < 0.01);
        let black = LayoutRaster::filled(8, 8, [0; 3]);
        let white = LayoutRaster::filled(8, 8, [255; 3]);
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
    }

    fn pattern() -> LayoutRaster {
        let mut r = LayoutRaster::filled(40, 30, [0; 3]);
        for (i, p) in r.pixels_mut().iter_mut().enumerate() {
            let v = ((i * 37) % 251) as u8;
            *p = [v, v / 2, 255 - v];
        }
        r
    }

    #[test]
    fn ssim_hand_values() {
        let r = pattern();
        assert_eq!(ssim(&r, &r).unwrap(), 1.0);
        let mut inv = r.clone();
        inv.pixels_mut().iter_mut().for_each(|p| *p = [255 - p[0], 255 - p[1], 255 - p[2]]);
        assert!(ssim(&r, &inv).unwrap() < 1.0);
        assert!((ssim(&r, &inv).unwrap() - ssim(&inv, &r).unwrap()).abs() < 1e-15);
        let c = LayoutRaster::filled(20, 20, [100; 3]);
        assert_eq!(ssim(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn ssim_matches_direct_window_sum() {
        let (w, h) = (16, 13);
        let a: Vec<f64> = (0..w * h).map(|i| ((i * 31) % 256) as f64).collect();
        let b: Vec<f64> = (0..w * h).map(|i| ((i * 17 + 5) % 256) as f64).collect();
        let k = gaussian(5);
        let mut total = 0.0;
        let mut count = 0.0;
        for oy in 0..=h - 11 {
            for ox in 0..=w - 11 {
                let (mut ux, mut uy, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for dy in 0..11 {
                    for dx in 0..11 {
                        let g = k[dx] * k[dy];
                        let (x, y) = (a[(oy + dy) * w + ox + dx], b[(oy + dy) * w + ox + dx]);
                        ux += g * x;
                        uy += g * y;
                        xx += g * x * x;
                        yy += g * y * y;
                        xy += g * x * y;
                    }
                }
                let (sx, sy, sxy) = (xx - ux * ux, yy - uy * uy, xy - ux * uy);
                total += ((2.0 * ux * uy + C1) * (2.0 * sxy + C2)) / ((ux * ux + uy * uy + C1) * (sx + sy + C2));
                count += 1.0;
            }
        }
        assert!((ssim_plane(&a, &b, w, h) - total / count).abs() < 1e-12);
    }
}
