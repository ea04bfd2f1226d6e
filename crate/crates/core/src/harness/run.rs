//! Parallel per-task runs over ingested sample pairs.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::report::{RunReport, SampleOutcome, EDITING_COLUMNS, GENERATION_COLUMNS, UNDERSTANDING_COLUMNS};
use super::{score_editing, score_generation, score_understanding_text, EvalOptions, SamplePair, Task};
use crate::metrics::{EditingScore, GenerationScore, UnderstandingScore};
use crate::raster::LayoutRaster;

fn understanding_values(s: &UnderstandingScore) -> Vec<f64> {
    vec![s.success, s.rmr, s.loc_acc, s.area_diff_m2, s.adj_acc, s.rel_acc]
}

fn generation_values(s: &GenerationScore) -> Vec<f64> {
    vec![s.micro_iou, s.macro_iou, s.ssim, s.psnr_db, s.ged, s.node_f1, s.edge_overlap]
}

fn editing_values(s: &EditingScore) -> Vec<f64> {
    let g = &s.generation;
    vec![s.delta_iou, s.delta_mse, g.micro_iou, g.macro_iou, g.ged, g.node_f1, g.edge_overlap]
}

/// Runs `score` over every pair on a pool of `jobs` threads; output keeps
/// input order.
fn run_pairs<F>(pairs: &[SamplePair], opts: &EvalOptions, score: F) -> Vec<SampleOutcome>
where
    F: Fn(&SamplePair) -> (Option<Vec<f64>>, Option<String>) + Sync,
{
    let one = |p: &SamplePair| {
        let start = Instant::now();
        let (values, error) = score(p);
        SampleOutcome { id: p.id.clone(), values, error, elapsed: start.elapsed() }
    };
    match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build() {
        Ok(pool) => pool.install(|| pairs.par_iter().map(one).collect()),
        Err(_) => pairs.iter().map(one).collect(),
    }
}

fn read_text(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_raster(path: &Path) -> Result<LayoutRaster, String> {
    LayoutRaster::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads an optional counterpart. Absent or unreadable files come back as
/// `None` with the reason.
fn optional<T>(
    path: Option<&Path>,
    what: &str,
    load: impl Fn(&Path) -> Result<T, String>,
) -> (Option<T>, Option<String>) {
    match path {
        None => (None, Some(format!("missing {what}"))),
        Some(p) => match load(p) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e)),
        },
    }
}

pub fn run_understanding(pairs: &[SamplePair], opts: &EvalOptions) -> RunReport {
    let samples = run_pairs(pairs, opts, |p| {
        let gt = match read_text(&p.gt_path) {
            Ok(t) => t,
            Err(e) => return (None, Some(e)),
        };
        let (pred, err) = optional(p.pred_path.as_deref(), "prediction", read_text);
        match score_understanding_text(&gt, pred.as_deref()) {
            Ok(s) => (Some(understanding_values(&s)), err),
            Err(e) => (None, Some(format!("ground truth: {e}"))),
        }
    });
    RunReport { task: Task::Understanding, columns: UNDERSTANDING_COLUMNS, samples, options: *opts, fid: None }
}

pub fn run_generation(pairs: &[SamplePair], opts: &EvalOptions) -> RunReport {
    let samples = run_pairs(pairs, opts, |p| {
        let gt = match read_raster(&p.gt_path) {
            Ok(r) => r,
            Err(e) => return (None, Some(e)),
        };
        let (pred, err) = optional(p.pred_path.as_deref(), "prediction", read_raster);
        match score_generation(&gt, pred.as_ref(), opts) {
            Ok(s) => (Some(generation_values(&s)), err),
            Err(e) => (None, Some(e.to_string())),
        }
    });
    RunReport { task: Task::Generation, columns: GENERATION_COLUMNS, samples, options: *opts, fid: None }
}

pub fn run_editing(pairs: &[SamplePair], opts: &EvalOptions) -> RunReport {
    let samples = run_pairs(pairs, opts, |p| {
        let gt = match read_raster(&p.gt_path) {
            Ok(r) => r,
            Err(e) => return (None, Some(e)),
        };
        let before = match p.before_path.as_deref().map(read_raster) {
            Some(Ok(r)) => r,
            Some(Err(e)) => return (None, Some(e)),
            None => return (None, Some("missing pre-edit layout".into())),
        };
        let (pred, err) = optional(p.pred_path.as_deref(), "prediction", read_raster);
        match score_editing(&before, &gt, pred.as_ref(), opts) {
            Ok(s) => (Some(editing_values(&s)), err),
            Err(e) => (None, Some(e.to_string())),
        }
    });
    RunReport { task: Task::Editing, columns: EDITING_COLUMNS, samples, options: *opts, fid: None }
}
