//! Flat-buffer entry points for foreign-language bindings.
//!
//! Images are row-major `u8` buffers with 3 (RGB) or 4 (RGBA, alpha
//! ignored) channels; masks are row-major `u8` buffers where nonzero means
//! set. Plans and codebooks travel as JSON text and token sequences as
//! their text form.

use crate::harness::{score_editing, score_generation, score_understanding_text, EvalOptions, SampleError};
use crate::mask::Mask;
use crate::metrics::{EditingScore, GenerationScore, UnderstandingScore};
use crate::model::RoomCategory;
use crate::postproc::run_pipeline;
use crate::raster::{LayoutRaster, RasterError};
use crate::tokenizer::{Codebook, CodebookFileError, TokenSequence, Tokenizer, TokenizerError};

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("buffer of {len} bytes does not hold {height}×{width}×{channels}")]
    BufferSize { height: usize, width: usize, channels: usize, len: usize },
    #[error("unsupported channel count {0}")]
    Channels(usize),
    #[error("unknown room category {0:?}")]
    Category(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Codebook(#[from] CodebookFileError),
}

/// Borrowed image buffer.
#[derive(Debug, Clone, Copy)]
pub struct ImageView<'a> {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: &'a [u8],
}

impl ImageView<'_> {
    pub fn to_raster(&self) -> Result<LayoutRaster, ApiError> {
        let Self { height, width, channels, data } = *self;
        if !(channels == 3 || channels == 4) {
            return Err(ApiError::Channels(channels));
        }
        if data.len() != height * width * channels {
            return Err(ApiError::BufferSize { height, width, channels, len: data.len() });
        }
        let pixels = data.chunks_exact(channels).map(|p| [p[0], p[1], p[2]]).collect();
        Ok(LayoutRaster::from_pixels(width, height, pixels))
    }
}

/// RGB bytes of a raster, row-major.
pub fn raster_to_rgb(raster: &LayoutRaster) -> Vec<u8> {
    raster.pixels().iter().flatten().copied().collect()
}

pub fn mask_from_bytes(height: usize, width: usize, data: &[u8]) -> Result<Mask, ApiError> {
    if data.len() != height * width {
        return Err(ApiError::BufferSize { height, width, channels: 1, len: data.len() });
    }
    Ok(Mask::from_bits(width, height, data.iter().map(|&b| b != 0).collect()))
}

/// 0/1 bytes of a mask, row-major.
pub fn mask_to_bytes(mask: &Mask) -> Vec<u8> {
    mask.bits().iter().map(|&b| u8::from(b)).collect()
}

pub fn understanding(gt_json: &str, pred_json: Option<&str>) -> Result<UnderstandingScore, ApiError> {
    Ok(score_understanding_text(gt_json, pred_json)?)
}

pub fn generation(gt: ImageView, pred: Option<ImageView>, opts: &EvalOptions) -> Result<GenerationScore, ApiError> {
    let pred = pred.map(|p| p.to_raster()).transpose()?;
    Ok(score_generation(&gt.to_raster()?, pred.as_ref(), opts)?)
}

pub fn editing(
    before: ImageView,
    gt_after: ImageView,
    pred_after: Option<ImageView>,
    opts: &EvalOptions,
) -> Result<EditingScore, ApiError> {
    let pred = pred_after.map(|p| p.to_raster()).transpose()?;
    Ok(score_editing(&before.to_raster()?, &gt_after.to_raster()?, pred.as_ref(), opts)?)
}

/// Normalized layout as RGB bytes, 256×256.
pub fn postprocess(image: ImageView, opts: &EvalOptions) -> Result<Vec<u8>, ApiError> {
    Ok(raster_to_rgb(&run_pipeline(&image.to_raster()?, &opts.pipeline())?))
}

/// Tokenizer built from codebook JSON texts.
pub fn tokenizer(n: usize, outline_json: &str, room_json: &str) -> Result<Tokenizer<f32>, ApiError> {
    Ok(Tokenizer::new(n, Codebook::from_json(outline_json)?, Codebook::from_json(room_json)?)?)
}

/// Text form of the tokens of a 256×256 outline mask and its rooms, rooms
/// given as `(category name, mask bytes)`.
pub fn tokenize(tok: &Tokenizer<f32>, outline: &[u8], rooms: &[(&str, &[u8])]) -> Result<String, ApiError> {
    let side = crate::geometry::RASTER_SIDE;
    let outline = mask_from_bytes(side, side, outline)?;
    let rooms = rooms
        .iter()
        .map(|(name, data)| {
            let cat: RoomCategory = name.parse().map_err(|_| ApiError::Category(name.to_string()))?;
            Ok((cat, mask_from_bytes(side, side, data)?))
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    let refs: Vec<(RoomCategory, &Mask)> = rooms.iter().map(|(c, m)| (*c, m)).collect();
    Ok(tok.encode(&outline, &refs)?.to_text())
}

/// Outline mask bytes and `(category name, mask bytes)` per room.
pub type DecodedPlan = (Vec<u8>, Vec<(String, Vec<u8>)>);

pub fn detokenize(tok: &Tokenizer<f32>, text: &str) -> Result<DecodedPlan, ApiError> {
    let (outline, rooms) = tok.decode(&TokenSequence::from_text(text)?)?;
    Ok((mask_to_bytes(&outline), rooms.iter().map(|(c, m)| (c.name().to_string(), mask_to_bytes(m))).collect()))
}
