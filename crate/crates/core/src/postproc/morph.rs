//! Binary morphology with square structuring elements.
//!
//! Pixels outside the frame count as background, so erosion eats into shapes
//! that touch the border.

use crate::mask::Mask;

/// Square structuring element of side `2 * radius + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MorphKernel {
    radius: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("kernel radius must be at least 1")]
pub struct ZeroRadius;

impl MorphKernel {
    pub fn square(radius: usize) -> Result<Self, ZeroRadius> {
        if radius == 0 {
            Err(ZeroRadius)
        } else {
            Ok(Self { radius })
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// Sliding-window pass along one axis. With `need_all` the output is set only
/// when the full window (including out-of-frame cells) is set.
fn pass(src: &[bool], len: usize, lines: usize, stride: usize, step: usize, r: usize, need_all: bool) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let mut prefix = vec![0u32; len + 1];
    let full = (2 * r + 1) as u32;
    for line in 0..lines {
        let base = line * stride;
        for k in 0..len {
            prefix[k + 1] = prefix[k] + src[base + k * step] as u32;
        }
        for k in 0..len {
            let lo = k.saturating_sub(r);
            let hi = (k + r + 1).min(len);
            let n = prefix[hi] - prefix[lo];
            out[base + k * step] = if need_all { n == full } else { n > 0 };
        }
    }
    out
}

fn separable(mask: &Mask, r: usize, need_all: bool) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let rows = pass(mask.bits(), w, h, w, 1, r, need_all);
    let cols = pass(&rows, h, w, 1, w, r, need_all);
    Mask::from_bits(w, h, cols)
}

pub fn dilate(mask: &Mask, kernel: MorphKernel) -> Mask {
    separable(mask, kernel.radius, false)
}

pub fn erode(mask: &Mask, kernel: MorphKernel) -> Mask {
    separable(mask, kernel.radius, true)
}

/// Erosion followed by dilation.
pub fn open(mask: &Mask, kernel: MorphKernel) -> Mask {
    dilate(&erode(mask, kernel), kernel)
}

/// Dilation followed by erosion.
pub fn close(mask: &Mask, kernel: MorphKernel) -> Mask {
    erode(&dilate(mask, kernel), kernel)
}

/// Dilation by `radius`, where zero is the identity.
pub(crate) fn dilate_by(mask: &Mask, radius: usize) -> Mask {
    match MorphKernel::square(radius) {
        Ok(k) => dilate(mask, k),
        Err(_) => mask.clone(),
    }
}

/// Erosion by `radius`, where zero is the identity.
pub(crate) fn erode_by(mask: &Mask, radius: usize) -> Mask {
    match MorphKernel::square(radius) {
        Ok(k) => erode(mask, k),
        Err(_) => mask.clone(),
    }
}
