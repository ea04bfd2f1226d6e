//! Binary occupancy masks.

use std::collections::VecDeque;

/// Row-major binary occupancy grid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for Mask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("count", &self.count())
            .finish()
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![true; width * height] }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "bit count must match dimensions");
        Self { width, height, bits }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    /// Axis-aligned rectangle with top-left corner `(x, y)`, clipped to the frame.
    pub fn rect(width: usize, height: usize, x: usize, y: usize, w: usize, h: usize) -> Self {
        Self::from_fn(width, height, |px, py| px >= x && px < x + w && py >= y && py < y + h)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn set_index(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_shape(&self, other: &Mask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Coordinates of set pixels in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        debug_assert!(self.same_shape(other));
        self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count()
    }

    pub fn union_count(&self, other: &Mask) -> usize {
        debug_assert!(self.same_shape(other));
        self.bits.iter().zip(&other.bits).filter(|(a, b)| **a || **b).count()
    }

    pub fn iou(&self, other: &Mask) -> f64 {
        let u = self.union_count(other);
        if u == 0 {
            1.0
        } else {
            self.intersection_count(other) as f64 / u as f64
        }
    }

    pub fn and(&self, other: &Mask) -> Mask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Mask) -> Mask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &Mask) -> Mask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn not(&self) -> Mask {
        Mask { width: self.width, height: self.height, bits: self.bits.iter().map(|b| !b).collect() }
    }

    fn zip_with(&self, other: &Mask, f: impl Fn(bool, bool) -> bool) -> Mask {
        assert!(self.same_shape(other), "mask shapes differ");
        Mask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn bbox(&self) -> Option<BBox> {
        let mut bb: Option<BBox> = None;
        for (x, y) in self.iter_set() {
            bb = Some(match bb {
                None => BBox { min_x: x, min_y: y, max_x: x, max_y: y },
                Some(b) => {
                    BBox { min_x: b.min_x.min(x), min_y: b.min_y.min(y), max_x: b.max_x.max(x), max_y: b.max_y.max(y) }
                }
            });
        }
        bb
    }

    /// Mask with every background region not 4-connected to the frame border
    /// filled in.
    pub fn fill_holes(&self) -> Mask {
        let (w, h) = (self.width, self.height);
        let mut outside = vec![false; w * h];
        let mut queue = VecDeque::new();
        let seed = |i: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            if !self.bits[i] && !outside[i] {
                outside[i] = true;
                queue.push_back(i);
            }
        };
        for x in 0..w {
            seed(x, &mut outside, &mut queue);
            seed((h - 1) * w + x, &mut outside, &mut queue);
        }
        for y in 0..h {
            seed(y * w, &mut outside, &mut queue);
            seed(y * w + w - 1, &mut outside, &mut queue);
        }
        while let Some(i) = queue.pop_front() {
            for j in neighbors4(i, w, h) {
                seed(j, &mut outside, &mut queue);
            }
        }
        Mask { width: w, height: h, bits: outside.into_iter().map(|o| !o).collect() }
    }

    /// 4-connected components, ordered by their first pixel in row-major order.
    pub fn components(&self) -> Vec<Mask> {
        label_components(self.width, self.height, |i| self.bits[i].then_some(0u8)).into_iter().map(|(_, m)| m).collect()
    }
}

/// Row-major 4-neighbors of pixel index `i` inside a `w × h` frame.
pub(crate) fn neighbors4(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    let left = (x > 0).then(|| i - 1);
    let right = (x + 1 < w).then(|| i + 1);
    let up = (y > 0).then(|| i - w);
    let down = (y + 1 < h).then(|| i + w);
    [left, right, up, down].into_iter().flatten()
}

/// 4-connected labeling of pixels sharing the same key. Pixels whose key is
/// `None` are background. Components come back in order of first pixel.
pub(crate) fn label_components<K: Copy + PartialEq>(
    w: usize,
    h: usize,
    key: impl Fn(usize) -> Option<K>,
) -> Vec<(K, Mask)> {
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        let Some(k) = key(start) else { continue };
        let mut m = Mask::new(w, h);
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            m.bits[i] = true;
            for j in neighbors4(i, w, h) {
                if !seen[j] && key(j) == Some(k) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        out.push((k, m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_count_and_bbox() {
        let m = Mask::rect(16, 16, 2, 3, 4, 5);
        assert_eq!(m.count(), 20);
        assert_eq!(m.bbox(), Some(BBox { min_x: 2, min_y: 3, max_x: 5, max_y: 7 }));
    }

    #[test]
    fn fill_holes_closes_ring() {
        let ring = Mask::rect(10, 10, 2, 2, 6, 6).and_not(&Mask::rect(10, 10, 4, 4, 2, 2));
        assert_eq!(ring.count(), 32);
        assert_eq!(ring.fill_holes(), Mask::rect(10, 10, 2, 2, 6, 6));
    }

    #[test]
    fn diagonal_pixels_are_separate_components() {
        let mut m = Mask::new(4, 4);
        m.set(0, 0, true);
        m.set(1, 1, true);
        assert_eq!(m.components().len(), 2);
    }

    #[test]
    fn iou_of_empty_masks_is_one() {
        assert_eq!(Mask::new(4, 4).iou(&Mask::new(4, 4)), 1.0);
    }
}
