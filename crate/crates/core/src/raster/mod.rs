//! Color-coded layout rasters: rendering plans, classifying pixels back to
//! legend classes, and recovering room masks.

mod render;

use std::path::Path;

use crate::geometry::RASTER_SIDE;
use crate::mask::{label_components, Mask};
use crate::model::ColorClass;

pub use render::{render, render_with, RenderError, DEFAULT_WALL_THICKNESS, JITTER_MAX};

/// Components below this many pixels are treated as noise.
pub const MIN_ROOM_PX: usize = 16;

pub type Rgb = [u8; 3];

/// Fixed mapping from color class to RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorLegend {
    entries: [(ColorClass, Rgb); 10],
}

impl Default for ColorLegend {
    fn default() -> Self {
        Self::standard()
    }
}

impl ColorLegend {
    pub fn standard() -> Self {
        use ColorClass::*;
        Self {
            entries: [
                (LightKhaki, [238, 232, 170]),
                (Orange, [255, 165, 0]),
                (LightSalmon, [240, 128, 128]),
                (LightCyan, [173, 216, 210]),
                (OliveGreen, [107, 142, 35]),
                (Violet, [218, 112, 214]),
                (Plum, [221, 160, 221]),
                (BrightYellow, [255, 215, 0]),
                (Black, [0, 0, 0]),
                (White, [255, 255, 255]),
            ],
        }
    }

    pub fn entries(&self) -> &[(ColorClass, Rgb); 10] {
        &self.entries
    }

    pub fn rgb(&self, class: ColorClass) -> Rgb {
        self.entries[class.index()].1
    }

    /// Nearest legend entry by squared RGB distance; ties go to the earlier
    /// table entry. Returns the class and the squared distance.
    pub fn nearest(&self, px: Rgb) -> (ColorClass, u32) {
        let mut best = (self.entries[0].0, u32::MAX);
        for &(class, c) in &self.entries {
            let d = dist2(px, c);
            if d < best.1 {
                best = (class, d);
            }
        }
        best
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut min = u32::MAX;
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                min = min.min(dist2(a.1, b.1));
            }
        }
        (min as f64).sqrt()
    }
}

#[inline]
pub(crate) fn dist2(a: Rgb, b: Rgb) -> u32 {
    a.iter()
        .zip(&b)
        .map(|(&x, &y)| {
            let d = x as i32 - y as i32;
            (d * d) as u32
        })
        .sum()
}

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("cannot read image {path}: {source}")]
    Read { path: String, source: image::ImageError },
    #[error("cannot write image {path}: {source}")]
    Write { path: String, source: image::ImageError },
}

/// Row-major RGB8 image. Layouts are 256×256 once normalized.
#[derive(Clone, PartialEq, Eq)]
pub struct LayoutRaster {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl std::fmt::Debug for LayoutRaster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LayoutRaster({}x{})", self.width, self.height)
    }
}

impl LayoutRaster {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        Self { width, height, pixels: vec![color; width * height] }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count must match dimensions");
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    pub fn same_shape(&self, other: &LayoutRaster) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_shape(&self, other: &LayoutRaster) -> Result<(), RasterError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(RasterError::ShapeMismatch(self.width, self.height, other.width, other.height))
        }
    }

    pub fn from_image(img: &image::RgbImage) -> Self {
        Self { width: img.width() as usize, height: img.height() as usize, pixels: img.pixels().map(|p| p.0).collect() }
    }

    pub fn to_image(&self) -> image::RgbImage {
        let mut img = image::RgbImage::new(self.width as u32, self.height as u32);
        for (dst, src) in img.pixels_mut().zip(&self.pixels) {
            dst.0 = *src;
        }
        img
    }

    /// Reads any image format `image` understands; alpha is dropped.
    pub fn load(path: &Path) -> Result<Self, RasterError> {
        let img = image::open(path).map_err(|source| RasterError::Read { path: path.display().to_string(), source })?;
        Ok(Self::from_image(&img.to_rgb8()))
    }

    /// Writes an 8-bit RGB PNG.
    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        self.to_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| RasterError::Write { path: path.display().to_string(), source })
    }
}

/// Per-pixel legend class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<ColorClass>,
}

impl LabelMap {
    pub fn filled(width: usize, height: usize, class: ColorClass) -> Self {
        Self { width, height, labels: vec![class; width * height] }
    }

    pub fn from_labels(width: usize, height: usize, labels: Vec<ColorClass>) -> Self {
        assert_eq!(labels.len(), width * height, "label count must match dimensions");
        Self { width, height, labels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[ColorClass] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [ColorClass] {
        &mut self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> ColorClass {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: ColorClass) {
        self.labels[y * self.width + x] = c;
    }

    pub fn same_shape(&self, other: &LabelMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_shape(&self, other: &LabelMap) -> Result<(), RasterError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(RasterError::ShapeMismatch(self.width, self.height, other.width, other.height))
        }
    }

    pub fn class_mask(&self, class: ColorClass) -> Mask {
        Mask::from_bits(self.width, self.height, self.labels.iter().map(|&l| l == class).collect())
    }

    pub fn mask_where(&self, f: impl Fn(ColorClass) -> bool) -> Mask {
        Mask::from_bits(self.width, self.height, self.labels.iter().map(|&l| f(l)).collect())
    }

    /// Legend-pure raster of these labels.
    pub fn recolor(&self, legend: &ColorLegend) -> LayoutRaster {
        LayoutRaster::from_pixels(self.width, self.height, self.labels.iter().map(|&c| legend.rgb(c)).collect())
    }
}

/// Labels every pixel with its nearest legend class.
pub fn classify_pixels(raster: &LayoutRaster, legend: &ColorLegend) -> LabelMap {
    LabelMap {
        width: raster.width,
        height: raster.height,
        labels: raster.pixels.iter().map(|&p| legend.nearest(p).0).collect(),
    }
}

/// One mask per 4-connected component of each room color class, dropping
/// components smaller than `min_room_px`. Ordered by first pixel.
pub fn extract_room_masks(labels: &LabelMap, min_room_px: usize) -> Vec<(ColorClass, Mask)> {
    label_components(labels.width, labels.height, |i| {
        let c = labels.labels[i];
        c.is_room().then_some(c)
    })
    .into_iter()
    .filter(|(_, m)| m.count() >= min_room_px)
    .collect()
}

/// Nearest-neighbor resize to `RASTER_SIDE × RASTER_SIDE`.
pub fn resize_nearest(raster: &LayoutRaster) -> Result<LayoutRaster, RasterError> {
    resize_nearest_to(raster, RASTER_SIDE, RASTER_SIDE)
}

/// Nearest-neighbor resize sampling source pixel centers.
pub fn resize_nearest_to(raster: &LayoutRaster, width: usize, height: usize) -> Result<LayoutRaster, RasterError> {
    if raster.width == 0 || raster.height == 0 || width == 0 || height == 0 {
        return Err(RasterError::EmptyImage);
    }
    if raster.width == width && raster.height == height {
        return Ok(raster.clone());
    }
    let (sw, sh) = (raster.width, raster.height);
    let xs: Vec<usize> = (0..width).map(|x| ((2 * x + 1) * sw) / (2 * width)).collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let sy = ((2 * y + 1) * sh) / (2 * height);
        pixels.extend(xs.iter().map(|&sx| raster.pixels[sy * sw + sx]));
    }
    Ok(LayoutRaster { width, height, pixels })
}
