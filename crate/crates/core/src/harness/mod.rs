//! Batch evaluation: dataset ingestion, per-task runs and reports.

mod report;
mod run;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::RASTER_SIDE;
use crate::graph::{extract_adjacency, EdgeCostMode, NodeMatchMode, DEFAULT_WALL_PX};
use crate::json::{parse_canonical_json, PlanJsonError};
use crate::mask::Mask;
use crate::metrics::{
    editing_score, generation_score, understanding_from_text, understanding_score, EditingScore, GenerationScore,
    MetricError, StructureOptions, UnderstandingScore,
};
use crate::model::{Edge, FloorPlan, Room};
use crate::postproc::{run_pipeline, PipelineConfig};
use crate::raster::{classify_pixels, extract_room_masks, ColorLegend, LayoutRaster, RasterError, MIN_ROOM_PX};

pub use report::{
    aggregate, correction_table, coupling, read_metric_column, Aggregate, RunReport, SampleOutcome, EDITING_COLUMNS,
    GENERATION_COLUMNS, UNDERSTANDING_COLUMNS,
};
pub use run::{run_editing, run_generation, run_understanding};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("no ground-truth samples found in {0}")]
    EmptyDataset(PathBuf),
    #[error("cannot read {path}: {msg}")]
    UnreadableFile { path: PathBuf, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Understanding,
    Generation,
    Editing,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Understanding => "understanding",
            Task::Generation => "generation",
            Task::Editing => "editing",
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Task::Understanding => "json",
            Task::Generation | Task::Editing => "png",
        }
    }
}

/// Keys accepted in a config file; each mirrors the CLI flag of the same
/// name. Underscores and dashes are interchangeable.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub gt: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub before: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub no_correction: Option<bool>,
    pub wall_px: Option<usize>,
    pub grid_n: Option<usize>,
    pub codebook: Option<PathBuf>,
    pub room_codebook: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        let normalized: toml::Table = table.into_iter().map(|(k, v)| (k.replace('_', "-"), v)).collect();
        normalized.try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Settings of one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalOptions {
    pub jobs: usize,
    pub correction: bool,
    pub wall_px: usize,
    pub open_close_radius: usize,
    pub noise_component_px: usize,
    pub wall_thickness: usize,
    #[serde(skip)]
    pub edge_cost: EdgeCostMode,
    #[serde(skip)]
    pub node_mode: NodeMatchMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            jobs: 1,
            correction: p.correction_enabled,
            wall_px: DEFAULT_WALL_PX,
            open_close_radius: p.open_close_radius,
            noise_component_px: p.noise_component_px,
            wall_thickness: p.wall_thickness,
            edge_cost: EdgeCostMode::default(),
            node_mode: NodeMatchMode::default(),
        }
    }
}

impl EvalOptions {
    /// Pipeline applied to predictions.
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            correction_enabled: self.correction,
            open_close_radius: self.open_close_radius,
            noise_component_px: self.noise_component_px,
            wall_thickness: self.wall_thickness,
        }
    }

    /// Pipeline applied to ground truth and pre-edit layouts: never corrected.
    pub fn reference_pipeline(&self) -> PipelineConfig {
        PipelineConfig { correction_enabled: false, ..self.pipeline() }
    }

    pub fn structure(&self) -> StructureOptions {
        StructureOptions {
            wall_px: self.wall_px,
            min_room_px: MIN_ROOM_PX,
            edge_cost: self.edge_cost,
            node_mode: self.node_mode,
        }
    }
}

/// One ground-truth file and its counterparts, matched by file stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePair {
    pub id: String,
    pub gt_path: PathBuf,
    pub pred_path: Option<PathBuf>,
    pub before_path: Option<PathBuf>,
}

fn files_by_stem(dir: &Path, ext: &str) -> Result<BTreeMap<String, PathBuf>, HarnessError> {
    let unreadable = |e: std::io::Error| HarnessError::UnreadableFile { path: dir.into(), msg: e.to_string() };
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(unreadable)? {
        let path = entry.map_err(unreadable)?.path();
        let matches = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext));
        if let (true, Some(stem)) = (matches && path.is_file(), path.file_stem().and_then(|s| s.to_str())) {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

/// Pairs every gt file with same-stem prediction and, for editing, pre-edit
/// files. Missing counterparts stay `None` and are scored as failures.
pub fn ingest(
    gt_dir: &Path,
    pred_dir: &Path,
    before_dir: Option<&Path>,
    task: Task,
) -> Result<Vec<SamplePair>, HarnessError> {
    let ext = task.extension();
    let gt = files_by_stem(gt_dir, ext)?;
    if gt.is_empty() {
        return Err(HarnessError::EmptyDataset(gt_dir.into()));
    }
    let pred = if pred_dir.is_dir() { files_by_stem(pred_dir, ext)? } else { BTreeMap::new() };
    let before = match before_dir {
        Some(d) if d.is_dir() => files_by_stem(d, "png")?,
        _ => BTreeMap::new(),
    };
    Ok(gt
        .into_iter()
        .map(|(id, gt_path)| SamplePair {
            pred_path: pred.get(&id).cloned(),
            before_path: before.get(&id).cloned(),
            id,
            gt_path,
        })
        .collect())
}

/// [`ingest`] over `root/gt`, `root/pred` and, for editing, `root/before`.
pub fn ingest_dataset(root: &Path, task: Task) -> Result<Vec<SamplePair>, HarnessError> {
    let gt = root.join("gt");
    if !gt.is_dir() {
        return Err(HarnessError::EmptyDataset(root.into()));
    }
    let before = (task == Task::Editing).then(|| root.join("before"));
    ingest(&gt, &root.join("pred"), before.as_deref(), task)
}

/// Error from scoring a single in-memory sample.
#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Plan(#[from] PlanJsonError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Scores a model answer against gt JSON text. A gt that fails to parse is
/// an error; an unparsable answer scores as failed.
pub fn score_understanding_text(gt_json: &str, pred_json: Option<&str>) -> Result<UnderstandingScore, SampleError> {
    let gt = parse_canonical_json(gt_json)?;
    Ok(match pred_json {
        Some(t) => understanding_from_text(t, &gt),
        None => UnderstandingScore::failed(&gt),
    })
}

/// Understanding score of two already parsed plans.
pub fn score_understanding_plans(pred: &FloorPlan, gt: &FloorPlan) -> UnderstandingScore {
    understanding_score(pred, gt)
}

fn blank() -> LayoutRaster {
    LayoutRaster::filled(RASTER_SIDE, RASTER_SIDE, [255, 255, 255])
}

/// Normalizes both layouts and scores them. A missing prediction is scored
/// as an empty white canvas.
pub fn score_generation(
    gt_raw: &LayoutRaster,
    pred_raw: Option<&LayoutRaster>,
    opts: &EvalOptions,
) -> Result<GenerationScore, SampleError> {
    let gt = run_pipeline(gt_raw, &opts.reference_pipeline())?;
    let pred = match pred_raw {
        Some(p) => run_pipeline(p, &opts.pipeline())?,
        None => blank(),
    };
    Ok(generation_score(&pred, &gt, &opts.structure())?)
}

/// Normalizes the three layouts and scores the edit. A missing prediction
/// is scored as an unedited copy of `before`.
pub fn score_editing(
    before_raw: &LayoutRaster,
    gt_raw: &LayoutRaster,
    pred_raw: Option<&LayoutRaster>,
    opts: &EvalOptions,
) -> Result<EditingScore, SampleError> {
    let legend = ColorLegend::standard();
    let before = run_pipeline(before_raw, &opts.reference_pipeline())?;
    let gt = run_pipeline(gt_raw, &opts.reference_pipeline())?;
    let pred = match pred_raw {
        Some(p) => run_pipeline(p, &opts.pipeline())?,
        None => before.clone(),
    };
    let labels = |r: &LayoutRaster| classify_pixels(r, &legend);
    Ok(editing_score(&labels(&before), &labels(&pred), &labels(&gt), None, &opts.structure())?)
}

/// Structured plan recovered from a normalized layout: the outline is the
/// hole-filled non-white footprint, rooms are the room-color components.
pub fn plan_from_layout(raster: &LayoutRaster, wall_px: usize) -> FloorPlan {
    let labels = classify_pixels(raster, &ColorLegend::standard());
    let outline: Mask = labels.mask_where(|c| c != crate::model::ColorClass::White).fill_holes();
    let mut plan = FloorPlan { outline: Some(outline), ..FloorPlan::default() };
    for (class, mask) in extract_room_masks(&labels, MIN_ROOM_PX) {
        let Some(category) = class.canonical_category() else { continue };
        let idx = plan.rooms.len() as u32;
        plan.rooms.push(Room::from_mask(idx, category, mask).expect("components are nonempty"));
    }
    attach_edges(&mut plan, wall_px);
    plan.description = format!("Layout with {} rooms.", plan.rooms.len());
    plan
}

/// Replaces the plan's edges with those recovered from its room masks.
pub fn attach_edges(plan: &mut FloorPlan, wall_px: usize) {
    let masked: Vec<(usize, (crate::model::RoomCategory, Mask))> =
        plan.rooms.iter().enumerate().filter_map(|(i, r)| Some((i, (r.category, r.mask.clone()?)))).collect();
    let masks: Vec<_> = masked.iter().map(|(_, m)| m.clone()).collect();
    plan.edges = extract_adjacency(&masks, wall_px)
        .edges
        .into_iter()
        .map(|(a, b, relation)| {
            let (ra, rb) = (&plan.rooms[masked[a as usize].0], &plan.rooms[masked[b as usize].0]);
            Edge {
                room1: ra.idx,
                room2: rb.idx,
                relation,
                text: format!("{} is {relation} {}", ra.category, rb.category),
            }
        })
        .collect();
}
