//! Reconstruction fidelity of trained codebooks.

use super::codebook::CodebookKind;
use super::kmeans::{train_codebook_on, FeatureCorpus, KMeansOptions};
use super::{decode, extract_features, Codebook, Tokenizer, TokenizerError, PATCH_DIM};
use crate::mask::Mask;
use crate::metrics::ssim_plane;
use crate::model::FloorPlan;
use crate::scalar::Scalar;

/// Per-mask PSNR ceiling; a perfect reconstruction reports this value.
pub const PSNR_CAP_DB: f64 = 60.0;

/// PSNR of a binary reconstruction with peak 1, capped at [`PSNR_CAP_DB`].
pub fn mask_psnr(orig: &Mask, recon: &Mask) -> f64 {
    let total = orig.bits().len().max(1) as f64;
    let wrong = orig.bits().iter().zip(recon.bits()).filter(|(a, b)| a != b).count() as f64;
    if wrong == 0.0 {
        return PSNR_CAP_DB;
    }
    (10.0 * (total / wrong).log10()).min(PSNR_CAP_DB)
}

fn mask_ssim(orig: &Mask, recon: &Mask) -> f64 {
    let plane = |m: &Mask| m.bits().iter().map(|&b| if b { 255.0 } else { 0.0 }).collect::<Vec<f64>>();
    ssim_plane(&plane(orig), &plane(recon), orig.width(), orig.height())
}

/// Outline mask and room masks of every plan that carries them.
pub fn plan_corpus(plans: &[FloorPlan]) -> Vec<(Mask, Vec<Mask>)> {
    plans
        .iter()
        .filter_map(|p| {
            let outline = p.outline.clone()?;
            Some((outline, p.rooms.iter().filter_map(|r| r.mask.clone()).collect()))
        })
        .collect()
}

/// Mean reconstruction quality of one codebook branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionRow {
    pub branch: CodebookKind,
    pub n: usize,
    pub k: usize,
    pub masks: usize,
    pub psnr_db: f64,
    pub ssim: Option<f64>,
}

fn nearest_ids<T: Scalar>(corpus: &FeatureCorpus<T>, book: &Codebook<T>) -> Vec<u32> {
    (0..corpus.len()).map(|i| book.nearest(corpus.point(i)).0 as u32).collect()
}

/// Trains outline and room codebooks with `k` codes on grid side `n` and
/// measures encode→decode fidelity over the same corpus.
pub fn evaluate_reconstruction<T: Scalar>(
    plans: &[(Mask, Vec<Mask>)],
    n: usize,
    k: usize,
    seed: u64,
    with_ssim: bool,
) -> Result<(Tokenizer<T>, [ReconstructionRow; 2]), TokenizerError> {
    let mut outline_corpus = FeatureCorpus::<T>::new(PATCH_DIM);
    let mut room_corpus = FeatureCorpus::<T>::new(2 * PATCH_DIM);
    let mut outline_cells = Vec::with_capacity(plans.len());
    let mut room_cells = Vec::new();
    for (outline, rooms) in plans {
        outline_cells.push(outline_corpus.push_grid(&extract_features(outline, None, n)?)?);
        for r in rooms {
            room_cells.push(room_corpus.push_grid(&extract_features(r, Some(outline), n)?)?);
        }
    }
    let opts = KMeansOptions::default();
    let ob = train_codebook_on(&outline_corpus, CodebookKind::Outline, k, seed, &opts)?.codebook;
    let rb = train_codebook_on(&room_corpus, CodebookKind::Room, k, seed.wrapping_add(1), &opts)?.codebook;
    let o_ids = nearest_ids(&outline_corpus, &ob);
    let r_ids = nearest_ids(&room_corpus, &rb);

    let score = |book: &Codebook<T>, ids: &[u32], cells: &[usize], orig: &Mask| -> Result<(f64, f64), TokenizerError> {
        let tokens: Vec<u32> = cells.iter().map(|&c| ids[c]).collect();
        let recon = decode(&tokens, book, n)?;
        Ok((mask_psnr(orig, &recon), if with_ssim { mask_ssim(orig, &recon) } else { 0.0 }))
    };
    let mut o_acc = (0.0, 0.0);
    for ((outline, _), cells) in plans.iter().zip(&outline_cells) {
        let (p, s) = score(&ob, &o_ids, cells, outline)?;
        o_acc = (o_acc.0 + p, o_acc.1 + s);
    }
    let mut r_acc = (0.0, 0.0);
    for (r, cells) in plans.iter().flat_map(|(_, rooms)| rooms).zip(&room_cells) {
        let (p, s) = score(&rb, &r_ids, cells, r)?;
        r_acc = (r_acc.0 + p, r_acc.1 + s);
    }
    let row = |branch, count: usize, acc: (f64, f64)| {
        let c = count.max(1) as f64;
        ReconstructionRow { branch, n, k, masks: count, psnr_db: acc.0 / c, ssim: with_ssim.then_some(acc.1 / c) }
    };
    let rows = [row(CodebookKind::Outline, plans.len(), o_acc), row(CodebookKind::Room, room_cells.len(), r_acc)];
    Ok((Tokenizer::new(n, ob, rb)?, rows))
}
