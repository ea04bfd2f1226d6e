use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use planmetrics::harness::{
    correction_table, coupling, ingest, plan_from_layout, read_metric_column, run_editing, run_generation,
    run_understanding, ConfigFile, EvalOptions, RunReport, Task,
};
use planmetrics::metrics::frechet_distance;
use planmetrics::postproc::run_pipeline;
use planmetrics::raster::{render, LayoutRaster};
use planmetrics::synth::{noisy_raster, random_plan, synth_plan};
use planmetrics::tokenizer::{
    evaluate_reconstruction, patch_side, plan_corpus, Codebook, TokenSequence, Tokenizer, DEFAULT_GRID_N, K_SWEEP,
};
use planmetrics::{emit_canonical_json, parse_canonical_json, FeatureSet64, FloorPlan, Mask, Room};

#[derive(Parser)]
#[command(name = "planmetrics", version, about = "Floor-plan layout tokenization and evaluation")]
struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for per-sample scoring.
    #[arg(long, global = true, env = "PLANMETRICS_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Dataset root holding gt/, pred/ and, for editing, before/.
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    before: Option<PathBuf>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ScoreArgs {
    /// Skip structural correction of predictions.
    #[arg(long)]
    no_correction: bool,
    /// Maximum wall gap for two rooms to count as adjacent.
    #[arg(long)]
    wall_px: Option<usize>,
}

#[derive(Args, Clone)]
struct CodebookArgs {
    /// Outline codebook JSON.
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Room codebook JSON.
    #[arg(long)]
    room_codebook: Option<PathBuf>,
    #[arg(long)]
    grid_n: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of layout PNGs.
    #[arg(long, conflicts_with = "synthetic")]
    corpus: Option<PathBuf>,
    /// Use this many synthetic plans instead of a corpus.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    grid_n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the SSIM column.
    #[arg(long)]
    no_ssim: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Score JSON answers against ground-truth plans.
    EvalUnderstanding {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Score generated layout PNGs against ground truth.
    EvalGeneration {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        score: ScoreArgs,
        /// Run with and without correction and write both arms side by side.
        #[arg(long)]
        correction_table: bool,
        /// CSV of real-image feature rows for the Fréchet distance.
        #[arg(long, requires = "pred_features")]
        gt_features: Option<PathBuf>,
        /// CSV of generated-image feature rows.
        #[arg(long, requires = "gt_features")]
        pred_features: Option<PathBuf>,
    },
    /// Score edited layout PNGs against ground truth and the pre-edit layout.
    EvalEditing {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        score: ScoreArgs,
    },
    /// Normalize layout PNGs.
    Postprocess {
        /// A PNG file or a directory of them.
        #[arg(long)]
        input: PathBuf,
        /// Output file, or directory when the input is a directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_correction: bool,
    },
    /// Write one token sequence per layout PNG as `<stem>\t<tokens>`.
    Tokenize {
        /// PNG files or directories of them.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        books: CodebookArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode token sequences into masks, a plan and a rendered layout.
    Detokenize {
        /// File of sequences, one per line, optionally prefixed by `<id>\t`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        books: CodebookArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train codebooks and report reconstruction fidelity.
    TrainCodebook(TrainArgs),
    /// Pearson r between two per-sample metrics.
    Coupling {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        metric_a: String,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        metric_b: String,
        /// Scatter CSV of `id,x,y`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a plan to a layout PNG.
    Render {
        /// Plan JSON; masks come from --masks.
        #[arg(long, requires = "masks", conflicts_with = "synthetic")]
        plan: Option<PathBuf>,
        /// Directory with outline.png and room_<idx>.png.
        #[arg(long)]
        masks: Option<PathBuf>,
        /// Seed of a synthetic plan to render instead.
        #[arg(long)]
        synthetic: Option<u64>,
        /// Room count of the synthetic plan; random when absent.
        #[arg(long, requires = "synthetic")]
        rooms: Option<usize>,
        /// Also write the synthetic plan as JSON here.
        #[arg(long, requires = "synthetic")]
        emit_plan: Option<PathBuf>,
        /// Color jitter seed; 0 renders exact legend colors.
        #[arg(long)]
        seed: Option<u64>,
        /// Add salt noise, gray smudges and rescaling.
        #[arg(long)]
        noisy: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flags merged with config-file defaults.
struct Ctx {
    cfg: ConfigFile,
    jobs: Option<usize>,
}

impl Ctx {
    fn options(&self, score: Option<&ScoreArgs>) -> EvalOptions {
        let mut o = EvalOptions { jobs: self.jobs.or(self.cfg.jobs).unwrap_or(1).max(1), ..EvalOptions::default() };
        let no_corr = score.is_some_and(|s| s.no_correction) || self.cfg.no_correction == Some(true);
        o.correction = !no_corr;
        if let Some(w) = score.and_then(|s| s.wall_px).or(self.cfg.wall_px) {
            o.wall_px = w;
        }
        o
    }

    fn out_dir(&self, flag: Option<&PathBuf>) -> PathBuf {
        flag.or(self.cfg.out.as_ref()).cloned().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn dataset(&self, data: &DataArgs, task: Task) -> Result<Vec<planmetrics::harness::SamplePair>> {
        let pick = |flag: &Option<PathBuf>, cfg: &Option<PathBuf>, sub: &str| {
            flag.clone().or_else(|| cfg.clone()).or_else(|| data.root.as_ref().map(|r| r.join(sub)))
        };
        let gt = pick(&data.gt, &self.cfg.gt, "gt").ok_or_else(|| anyhow!("--gt or --root is required"))?;
        let pred = pick(&data.pred, &self.cfg.pred, "pred").ok_or_else(|| anyhow!("--pred or --root is required"))?;
        let before = pick(&data.before, &self.cfg.before, "before");
        if task == Task::Editing && before.is_none() {
            bail!("--before or --root is required for editing");
        }
        let before = if task == Task::Editing { before } else { None };
        Ok(ingest(&gt, &pred, before.as_deref(), task)?)
    }

    fn tokenizer(&self, books: &CodebookArgs) -> Result<Tokenizer<f32>> {
        let n = books.grid_n.or(self.cfg.grid_n).unwrap_or(DEFAULT_GRID_N);
        patch_side(n)?;
        let outline = books
            .codebook
            .clone()
            .or_else(|| self.cfg.codebook.clone())
            .ok_or_else(|| anyhow!("--codebook is required"))?;
        let room = books
            .room_codebook
            .clone()
            .or_else(|| self.cfg.room_codebook.clone())
            .ok_or_else(|| anyhow!("--room-codebook is required"))?;
        let load = |p: &Path| Codebook::<f32>::load(p).with_context(|| format!("codebook {}", p.display()));
        Ok(Tokenizer::new(n, load(&outline)?, load(&room)?)?)
    }
}

fn write_report(report: &RunReport, dir: &Path) -> Result<()> {
    report.write(dir).with_context(|| format!("writing reports to {}", dir.display()))?;
    print!("{}", report.aggregate_csv());
    for s in report.samples.iter().filter(|s| s.error.is_some()) {
        eprintln!("{}: {}", s.id, s.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

fn pngs_in(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_mask(path: &Path) -> Result<Mask> {
    let img = image::open(path).with_context(|| format!("reading {}", path.display()))?.into_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(Mask::from_bits(w, h, img.pixels().map(|p| p.0[0] >= 128).collect()))
}

fn save_mask(mask: &Mask, path: &Path) -> Result<()> {
    let bytes = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img =
        image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes).expect("buffer matches size");
    img.save(path).with_context(|| format!("writing {}", path.display()))
}

fn cmd_eval(ctx: &Ctx, task: Task, data: &DataArgs, score: Option<&ScoreArgs>) -> Result<u8> {
    let pairs = ctx.dataset(data, task)?;
    let opts = ctx.options(score);
    let report = match task {
        Task::Understanding => run_understanding(&pairs, &opts),
        Task::Generation => run_generation(&pairs, &opts),
        Task::Editing => run_editing(&pairs, &opts),
    };
    write_report(&report, &ctx.out_dir(data.out.as_ref()))?;
    Ok(report.exit_code())
}

fn cmd_eval_generation(
    ctx: &Ctx,
    data: &DataArgs,
    score: &ScoreArgs,
    table: bool,
    features: Option<(&Path, &Path)>,
) -> Result<u8> {
    let pairs = ctx.dataset(data, Task::Generation)?;
    let fid = match features {
        Some((g, p)) => Some(frechet_distance(&FeatureSet64::load_csv(g)?, &FeatureSet64::load_csv(p)?)?),
        None => None,
    };
    let out = ctx.out_dir(data.out.as_ref());
    let opts = ctx.options(Some(score));
    if !table {
        let report = RunReport { fid, ..run_generation(&pairs, &opts) };
        write_report(&report, &out)?;
        return Ok(report.exit_code());
    }
    let without = RunReport { fid, ..run_generation(&pairs, &EvalOptions { correction: false, ..opts }) };
    let with = RunReport { fid, ..run_generation(&pairs, &EvalOptions { correction: true, ..opts }) };
    without.write(&out.join("without_correction"))?;
    with.write(&out.join("with_correction"))?;
    let csv = correction_table(&without, &with);
    std::fs::write(out.join("correction_table.csv"), &csv)?;
    print!("{csv}");
    Ok(without.exit_code().max(with.exit_code()))
}

fn cmd_postprocess(ctx: &Ctx, input: &Path, out: &Path, no_correction: bool) -> Result<u8> {
    let cfg =
        EvalOptions { correction: !no_correction && ctx.cfg.no_correction != Some(true), ..EvalOptions::default() }
            .pipeline();
    let files = pngs_in(input)?;
    if input.is_dir() {
        std::fs::create_dir_all(out)?;
    }
    let mut code = 0;
    for f in &files {
        let target = if input.is_dir() { out.join(f.file_name().expect("listed file")) } else { out.to_path_buf() };
        let result = LayoutRaster::load(f).and_then(|r| run_pipeline(&r, &cfg)).and_then(|r| r.save_png(&target));
        if let Err(e) = result {
            eprintln!("{}: {e}", f.display());
            code = 1;
        }
    }
    Ok(code)
}

fn cmd_tokenize(ctx: &Ctx, inputs: &[PathBuf], books: &CodebookArgs, out: Option<&Path>) -> Result<u8> {
    let tok = ctx.tokenizer(books)?;
    let cfg = EvalOptions::default().reference_pipeline();
    let mut files = Vec::new();
    for i in inputs {
        files.extend(pngs_in(i)?);
    }
    let mut text = String::new();
    let mut code = 0;
    for f in &files {
        let encoded =
            LayoutRaster::load(f).and_then(|r| run_pipeline(&r, &cfg)).map_err(anyhow::Error::from).and_then(|r| {
                let plan = plan_from_layout(&r, EvalOptions::default().wall_px);
                let outline = plan.outline.as_ref().expect("layout plans carry an outline");
                let rooms: Vec<_> = plan.rooms.iter().filter_map(|r| Some((r.category, r.mask.as_ref()?))).collect();
                Ok(tok.encode(outline, &rooms)?)
            });
        match encoded {
            Ok(seq) => writeln!(text, "{}\t{}", stem(f), seq.to_text()).expect("string write"),
            Err(e) => {
                eprintln!("{}: {e:#}", f.display());
                code = 1;
            }
        }
    }
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn decoded_plan(outline: Mask, rooms: Vec<(planmetrics::RoomCategory, Mask)>, wall_px: usize) -> FloorPlan {
    let mut plan = FloorPlan { outline: Some(outline), ..FloorPlan::default() };
    for (cat, mask) in rooms {
        let idx = plan.rooms.len() as u32;
        if let Ok(room) = Room::from_mask(idx, cat, mask) {
            plan.rooms.push(room);
        }
    }
    planmetrics::harness::attach_edges(&mut plan, wall_px);
    plan.description = format!("Layout with {} rooms.", plan.rooms.len());
    plan
}

fn cmd_detokenize(ctx: &Ctx, input: &Path, books: &CodebookArgs, out: &Path) -> Result<u8> {
    let base = ctx.tokenizer(books)?;
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let mut code = 0;
    for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let (id, seq_text) = match line.split_once('\t') {
            Some((id, s)) => (id.to_string(), s),
            None => (format!("seq_{i:04}"), line),
        };
        let result = (|| -> Result<()> {
            let seq = TokenSequence::from_text(seq_text)?;
            let (outline, rooms) = base.decode(&seq)?;
            let dir = out.join(&id);
            std::fs::create_dir_all(&dir)?;
            save_mask(&outline, &dir.join("outline.png"))?;
            for (j, (_, m)) in rooms.iter().enumerate() {
                save_mask(m, &dir.join(format!("room_{j}.png")))?;
            }
            let plan = decoded_plan(outline, rooms, EvalOptions::default().wall_px);
            std::fs::write(dir.join("plan.json"), emit_canonical_json(&plan))?;
            render(&plan, 0)?.save_png(&dir.join("layout.png"))?;
            Ok(())
        })();
        if let Err(e) = result {
            eprintln!("{id}: {e:#}");
            code = 1;
        }
    }
    Ok(code)
}

fn cmd_train(ctx: &Ctx, args: &TrainArgs) -> Result<u8> {
    let seed = args.seed.or(ctx.cfg.seed).unwrap_or(0);
    let out = ctx.out_dir(args.out.as_ref());
    let plans: Vec<FloorPlan> = match (args.corpus.as_deref(), args.synthetic) {
        (Some(dir), _) => {
            let cfg = EvalOptions::default().reference_pipeline();
            let mut plans = Vec::new();
            for f in pngs_in(dir)? {
                let r = run_pipeline(&LayoutRaster::load(&f)?, &cfg)?;
                plans.push(plan_from_layout(&r, EvalOptions::default().wall_px));
            }
            plans
        }
        (None, Some(n)) => (0..n as u64).map(|i| random_plan(seed.wrapping_add(i))).collect(),
        (None, None) => bail!("--corpus or --synthetic is required"),
    };
    if plans.is_empty() {
        bail!("corpus is empty");
    }
    let corpus = plan_corpus(&plans);
    let grid_n =
        if args.grid_n.is_empty() { vec![ctx.cfg.grid_n.unwrap_or(DEFAULT_GRID_N)] } else { args.grid_n.clone() };
    let ks = if args.k.is_empty() { K_SWEEP.to_vec() } else { args.k.clone() };
    std::fs::create_dir_all(&out)?;
    let mut table = String::from("branch,n,k,masks,psnr_db,ssim\n");
    for &n in &grid_n {
        for &k in &ks {
            let (tok, rows) = evaluate_reconstruction::<f32>(&corpus, n, k, seed, !args.no_ssim)?;
            tok.outline.save(&out.join(format!("outline_n{n}_k{k}.json")))?;
            tok.room.save(&out.join(format!("room_n{n}_k{k}.json")))?;
            for r in rows {
                let ssim = r.ssim.map(|s| format!("{s:.4}")).unwrap_or_default();
                let branch = serde_json::to_value(r.branch)?.as_str().unwrap_or_default().to_string();
                writeln!(table, "{branch},{},{},{},{:.4},{ssim}", r.n, r.k, r.masks, r.psnr_db).expect("string write");
            }
        }
    }
    std::fs::write(out.join("reconstruction.csv"), &table)?;
    print!("{table}");
    Ok(0)
}

fn cmd_coupling(a: &Path, ma: &str, b: &Path, mb: &str, out: Option<&Path>) -> Result<u8> {
    let (r, csv) = coupling(&read_metric_column(a, ma)?, &read_metric_column(b, mb)?)?;
    if let Some(p) = out {
        std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("r,{r}");
    Ok(0)
}

fn plan_with_masks(plan_path: &Path, masks: &Path) -> Result<FloorPlan> {
    let text = std::fs::read_to_string(plan_path).with_context(|| format!("reading {}", plan_path.display()))?;
    let mut plan = parse_canonical_json(&text)?;
    plan.outline = Some(load_mask(&masks.join("outline.png"))?);
    for room in &mut plan.rooms {
        room.mask = Some(load_mask(&masks.join(format!("room_{}.png", room.idx)))?);
    }
    Ok(plan)
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx { cfg, jobs: cli.jobs };
    match &cli.command {
        Command::EvalUnderstanding { data } => cmd_eval(&ctx, Task::Understanding, data, None),
        Command::EvalGeneration { data, score, correction_table, gt_features, pred_features } => {
            let features = gt_features.as_deref().zip(pred_features.as_deref());
            cmd_eval_generation(&ctx, data, score, *correction_table, features)
        }
        Command::EvalEditing { data, score } => cmd_eval(&ctx, Task::Editing, data, Some(score)),
        Command::Postprocess { input, out, no_correction } => cmd_postprocess(&ctx, input, out, *no_correction),
        Command::Tokenize { input, books, out } => cmd_tokenize(&ctx, input, books, out.as_deref()),
        Command::Detokenize { input, books, out } => cmd_detokenize(&ctx, input, books, out),
        Command::TrainCodebook(args) => cmd_train(&ctx, args),
        Command::Coupling { a, metric_a, b, metric_b, out } => cmd_coupling(a, metric_a, b, metric_b, out.as_deref()),
        Command::Render { plan, masks, synthetic, rooms, emit_plan, seed, noisy, out } => {
            let plan = match (plan, synthetic) {
                (Some(p), _) => plan_with_masks(p, masks.as_deref().expect("clap requires --masks"))?,
                (None, Some(s)) => match rooms {
                    Some(r) => synth_plan(*s, *r),
                    None => random_plan(*s),
                },
                (None, None) => bail!("--plan or --synthetic is required"),
            };
            if let Some(p) = emit_plan {
                std::fs::write(p, emit_canonical_json(&plan))?;
            }
            let seed = seed.or(ctx.cfg.seed).unwrap_or(0);
            let raster = if *noisy { noisy_raster(&plan, seed) } else { render(&plan, seed)? };
            raster.save_png(out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
