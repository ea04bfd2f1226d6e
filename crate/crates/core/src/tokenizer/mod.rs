//! Room-instance tokenization.
//!
//! Masks are cut into an `n × n` grid of patches, each patch is average
//! pooled to an 8×8 occupancy vector, and every vector is replaced by the
//! index of its nearest codebook row. Room patches carry the matching outline
//! patch as context. Token ids from one plan are laid out as
//! `[begin, outline…, (label, room…)*, end]`.

mod codebook;
mod kmeans;
mod report;
mod sequence;

use crate::geometry::RASTER_SIDE;
use crate::mask::Mask;
use crate::model::RoomCategory;
use crate::scalar::Scalar;

pub use codebook::{Codebook, CodebookFileError, CodebookKind, DUPLICATE_CODE_EPS};
pub use kmeans::{train_codebook, train_codebook_on, FeatureCorpus, KMeansOptions, KMeansReport};
pub use report::{evaluate_reconstruction, mask_psnr, plan_corpus, ReconstructionRow, PSNR_CAP_DB};
pub use sequence::{parse_sequence, TokenSequence, VocabToken, Vocabulary, LABEL_COUNT};

/// Default grid side.
pub const DEFAULT_GRID_N: usize = 8;
/// Default codebook size.
pub const DEFAULT_K: usize = 256;
/// Codebook sizes trained when none are requested.
pub const K_SWEEP: [usize; 3] = [64, 128, 256];
/// Side of the pooled patch.
pub const POOLED_SIDE: usize = 8;
/// Dimension of one pooled patch.
pub const PATCH_DIM: usize = POOLED_SIDE * POOLED_SIDE;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TokenizerError {
    #[error("grid side {0} does not tile a {RASTER_SIDE}-pixel raster into patches of at least {POOLED_SIDE} pixels")]
    BadGridSize(usize),
    #[error("mask is {0}×{1}, expected {RASTER_SIDE}×{RASTER_SIDE}")]
    BadMaskSize(usize, usize),
    #[error("feature dimension {got} does not match codebook dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{distinct} distinct feature vectors cannot seed {k} codes")]
    TooFewSamples { distinct: usize, k: usize },
    #[error("token {0} is out of range")]
    BadToken(u32),
    #[error("expected {expected} ids, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sequence ends inside a group")]
    TruncatedSequence,
    #[error("id {0} at a label position is not a label")]
    UnknownLabel(u32),
    #[error("sequence is missing its begin or end marker")]
    MissingMarker,
    #[error("unparsable token text {0:?}")]
    UnparsableToken(String),
    #[error("codebook has no rows or rows of unequal length")]
    EmptyCodebook,
    #[error("codes {0} and {1} coincide")]
    DuplicateCode(usize, usize),
}

/// Patch side in pixels for grid side `n`.
pub fn patch_side(n: usize) -> Result<usize, TokenizerError> {
    if n == 0 || !RASTER_SIDE.is_multiple_of(n) || !(RASTER_SIDE / n).is_multiple_of(POOLED_SIDE) {
        return Err(TokenizerError::BadGridSize(n));
    }
    Ok(RASTER_SIDE / n)
}

/// Per-cell feature vectors of one mask, row-major over cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid<T> {
    n: usize,
    dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> FeatureGrid<T> {
    pub fn from_values(n: usize, dim: usize, values: Vec<T>) -> Result<Self, TokenizerError> {
        if values.len() != n * n * dim {
            return Err(TokenizerError::LengthMismatch { expected: n * n * dim, got: values.len() });
        }
        Ok(Self { n, dim, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    /// Feature vector of cell `(row, col)`.
    pub fn cell(&self, row: usize, col: usize) -> &[T] {
        let i = row * self.n + col;
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.dim)
    }
}

fn pool_into<T: Scalar>(mask: &Mask, n: usize, row: usize, col: usize, out: &mut Vec<T>) {
    let s = RASTER_SIDE / n;
    let f = s / POOLED_SIDE;
    let norm = T::lit(1.0 / (f * f) as f64);
    for py in 0..POOLED_SIDE {
        for px in 0..POOLED_SIDE {
            let (x0, y0) = (col * s + px * f, row * s + py * f);
            let mut hits = 0usize;
            for y in y0..y0 + f {
                for x in x0..x0 + f {
                    hits += mask.get(x, y) as usize;
                }
            }
            out.push(T::lit(hits as f64) * norm);
        }
    }
}

fn check_mask(m: &Mask) -> Result<(), TokenizerError> {
    if m.width() != RASTER_SIDE || m.height() != RASTER_SIDE {
        return Err(TokenizerError::BadMaskSize(m.width(), m.height()));
    }
    Ok(())
}

/// Average-pooled patch features of `mask`. Each cell yields 64 occupancy
/// values in `[0,1]`; with `context` the context patch follows, giving 128.
pub fn extract_features<T: Scalar>(
    mask: &Mask,
    context: Option<&Mask>,
    n: usize,
) -> Result<FeatureGrid<T>, TokenizerError> {
    patch_side(n)?;
    check_mask(mask)?;
    if let Some(c) = context {
        check_mask(c)?;
    }
    let dim = PATCH_DIM * if context.is_some() { 2 } else { 1 };
    let mut values = Vec::with_capacity(n * n * dim);
    for row in 0..n {
        for col in 0..n {
            pool_into(mask, n, row, col, &mut values);
            if let Some(c) = context {
                pool_into(c, n, row, col, &mut values);
            }
        }
    }
    Ok(FeatureGrid { n, dim, values })
}

/// Squared L2 distance, accumulated in eight lanes so it vectorizes.
#[inline]
pub(crate) fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        let d = *x - *y;
        tail += d * d;
    }
    acc.iter().copied().sum::<T>() + tail
}

/// Token ids of every cell: the nearest code by L2, lowest index on ties.
pub fn quantize<T: Scalar>(grid: &FeatureGrid<T>, book: &Codebook<T>) -> Result<Vec<u32>, TokenizerError> {
    if grid.dim != book.dim() {
        return Err(TokenizerError::DimensionMismatch { expected: book.dim(), got: grid.dim });
    }
    Ok(grid.cells().map(|f| book.nearest(f).0 as u32).collect())
}

/// Rebuilds a mask from token ids: the first 64 values of each code are
/// upsampled to the patch and thresholded at 0.5.
pub fn decode<T: Scalar>(tokens: &[u32], book: &Codebook<T>, n: usize) -> Result<Mask, TokenizerError> {
    let s = patch_side(n)?;
    if tokens.len() != n * n {
        return Err(TokenizerError::LengthMismatch { expected: n * n, got: tokens.len() });
    }
    if book.dim() < PATCH_DIM {
        return Err(TokenizerError::DimensionMismatch { expected: PATCH_DIM, got: book.dim() });
    }
    let f = s / POOLED_SIDE;
    let half = T::lit(0.5);
    let mut mask = Mask::new(RASTER_SIDE, RASTER_SIDE);
    for (cell, &t) in tokens.iter().enumerate() {
        let code = book.code(t as usize).ok_or(TokenizerError::BadToken(t))?;
        let (row, col) = (cell / n, cell % n);
        for (p, &v) in code[..PATCH_DIM].iter().enumerate() {
            if v < half {
                continue;
            }
            let (x0, y0) = (col * s + (p % POOLED_SIDE) * f, row * s + (p / POOLED_SIDE) * f);
            for y in y0..y0 + f {
                for x in x0..x0 + f {
                    mask.set(x, y, true);
                }
            }
        }
    }
    Ok(mask)
}

/// Outline and room codebooks used together to tokenize plans.
#[derive(Debug, Clone, PartialEq)]
pub struct Tokenizer<T> {
    pub n: usize,
    pub outline: Codebook<T>,
    pub room: Codebook<T>,
}

impl<T: Scalar> Tokenizer<T> {
    pub fn new(n: usize, outline: Codebook<T>, room: Codebook<T>) -> Result<Self, TokenizerError> {
        patch_side(n)?;
        if outline.dim() != PATCH_DIM {
            return Err(TokenizerError::DimensionMismatch { expected: PATCH_DIM, got: outline.dim() });
        }
        if room.dim() != 2 * PATCH_DIM {
            return Err(TokenizerError::DimensionMismatch { expected: 2 * PATCH_DIM, got: room.dim() });
        }
        Ok(Self { n, outline, room })
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.outline.k(), self.room.k())
    }

    /// Tokens of an outline mask and its rooms, rooms in the given order.
    pub fn encode(&self, outline: &Mask, rooms: &[(RoomCategory, &Mask)]) -> Result<TokenSequence, TokenizerError> {
        let o = quantize(&extract_features(outline, None, self.n)?, &self.outline)?;
        let mut groups = Vec::with_capacity(rooms.len());
        for (label, m) in rooms {
            let ids = quantize(&extract_features(m, Some(outline), self.n)?, &self.room)?;
            groups.push((*label, ids));
        }
        TokenSequence::new(self.n, o, groups)
    }

    /// Decoded outline mask and per-room masks.
    pub fn decode(&self, seq: &TokenSequence) -> Result<(Mask, Vec<(RoomCategory, Mask)>), TokenizerError> {
        if seq.n() != self.n {
            return Err(TokenizerError::BadGridSize(seq.n()));
        }
        let outline = decode(seq.outline(), &self.outline, self.n)?;
        let rooms = seq
            .rooms()
            .iter()
            .map(|(l, ids)| Ok((*l, decode(ids, &self.room, self.n)?)))
            .collect::<Result<_, TokenizerError>>()?;
        Ok((outline, rooms))
    }
}
