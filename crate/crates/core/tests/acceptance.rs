//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use planmetrics::graph::{
    extract_adjacency, graph_edit_distance, node_f1, AdjacencyGraph, EdgeCostMode, NodeMatchMode, RelationType,
    DEFAULT_WALL_PX,
};
use planmetrics::harness::{score_editing, score_generation, EvalOptions};
use planmetrics::metrics::{frechet_distance, psnr, understanding_score, FeatureSet};
use planmetrics::postproc::{run_pipeline, PipelineConfig};
use planmetrics::raster::{classify_pixels, extract_room_masks, render, MIN_ROOM_PX};
use planmetrics::synth::{noisy_raster, random_plan};
use planmetrics::tokenizer::{evaluate_reconstruction, parse_sequence, plan_corpus, TokenSequence, Vocabulary};
use planmetrics::{emit_canonical_json, parse_canonical_json, ColorLegend, LayoutRaster, RoomCategory};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let opts = EvalOptions::default();
    for seed in 0..25 {
        let plan = random_plan(seed);
        let parsed = parse_canonical_json(&emit_canonical_json(&plan)).map_err(|e| e.to_string())?;
        let u = understanding_score(&parsed, &parsed);
        check(
            (u.success, u.rmr, u.loc_acc, u.area_diff_m2, u.adj_acc, u.rel_acc) == (1.0, 1.0, 1.0, 0.0, 1.0, 1.0),
            || format!("plan {seed}: understanding {u:?}"),
        )?;

        let x = render(&plan, 0).map_err(|e| e.to_string())?;
        let g = score_generation(&x, Some(&x), &opts).map_err(|e| e.to_string())?;
        check(
            (g.micro_iou, g.macro_iou, g.ssim, g.ged, g.node_f1, g.edge_overlap) == (1.0, 1.0, 1.0, 0.0, 1.0, 1.0)
                && g.psnr_db == f64::INFINITY,
            || format!("plan {seed}: generation {g:?}"),
        )?;

        let mut edited = plan.clone();
        let old = edited.rooms[0].color_class();
        edited.rooms[0].category =
            *RoomCategory::ALL.iter().find(|c| c.color_class() != old).expect("legend has several room colors");
        let before = render(&edited, 0).map_err(|e| e.to_string())?;
        let e = score_editing(&before, &x, Some(&x), &opts).map_err(|e| e.to_string())?;
        check(e.delta_iou == 1.0 && e.delta_mse == 0.0 && e.generation.micro_iou == 1.0, || {
            format!("plan {seed}: editing {e:?}")
        })?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok("25 plans".into())
}

/// Edit cost of every node map, enumerated as permutations of `g2` nodes
/// padded with one deletion slot per `g1` node.
fn brute_force_ged(g1: &AdjacencyGraph, g2: &AdjacencyGraph, mode: EdgeCostMode) -> usize {
    let (n1, n2) = (g1.nodes.len(), g2.nodes.len());
    let matrix = |g: &AdjacencyGraph| {
        let n = g.nodes.len();
        let mut m = vec![vec![None; n]; n];
        for &(a, b, r) in &g.edges {
            let (i, j) = (a as usize, b as usize);
            m[i][j] = Some(r);
            m[j][i] = Some(r.inverse());
        }
        m
    };
    let (m1, m2) = (matrix(g1), matrix(g2));
    let slots: Vec<usize> = (0..n2 + n1).collect();
    let mut best = usize::MAX;
    let mut perm = slots.clone();
    permute(&mut perm, 0, &mut |p| {
        let image: Vec<Option<usize>> = p[..n1].iter().map(|&s| (s < n2).then_some(s)).collect();
        let mut cost = 0;
        for (a, img) in image.iter().enumerate() {
            cost += match img {
                Some(u) => usize::from(g1.nodes[a].1.color_class() != g2.nodes[*u].1.color_class()),
                None => 1,
            };
        }
        cost += n2 - image.iter().flatten().count();
        for a in 0..n1 {
            for b in a + 1..n1 {
                let e1 = m1[a][b];
                let e2 = match (image[a], image[b]) {
                    (Some(u), Some(v)) => m2[u][v],
                    _ => None,
                };
                cost += match (e1, e2) {
                    (Some(r1), Some(r2)) => usize::from(mode == EdgeCostMode::Relation && r1 != r2),
                    (None, None) => 0,
                    _ => 1,
                };
            }
        }
        let covered = |u: usize, v: usize| {
            let pre = |t: usize| image.iter().position(|&m| m == Some(t));
            pre(u).is_some() && pre(v).is_some()
        };
        for (u, row) in m2.iter().enumerate() {
            for (v, e) in row.iter().enumerate().skip(u + 1) {
                if e.is_some() && !covered(u, v) {
                    cost += 1;
                }
            }
        }
        best = best.min(cost);
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

fn random_graph(rng: &mut ChaCha8Rng) -> AdjacencyGraph {
    let n = rng.gen_range(0..=4);
    let pool = [RoomCategory::LivingRoom, RoomCategory::Kitchen, RoomCategory::Bathroom, RoomCategory::MasterRoom];
    let mut g = AdjacencyGraph::new((0..n).map(|i| (i as u32, pool[rng.gen_range(0..pool.len())])).collect());
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                g.add_edge(a as u32, b as u32, RelationType::ALL[rng.gen_range(0..RelationType::ALL.len())]);
            }
        }
    }
    g
}

fn ged_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for pair in 0..200 {
        let (g1, g2) = (random_graph(&mut rng), random_graph(&mut rng));
        for mode in [EdgeCostMode::Unlabeled, EdgeCostMode::Relation] {
            let fast = graph_edit_distance(&g1, &g2, mode).map_err(|e| e.to_string())?;
            let slow = brute_force_ged(&g1, &g2, mode) as f64;
            check(fast == slow, || format!("pair {pair} {mode:?}: search {fast}, enumeration {slow}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok("200 pairs, both edge modes".into())
}

fn frechet_closed_form() -> Outcome {
    let fs = |m: f64, v: f64| FeatureSet::from_moments(vec![m], vec![v]).map_err(|e| e.to_string());
    let shift = frechet_distance(&fs(0.0, 1.0)?, &fs(3.0, 1.0)?).map_err(|e| e.to_string())?;
    let scale = frechet_distance(&fs(0.0, 1.0)?, &fs(0.0, 9.0)?).map_err(|e| e.to_string())?;
    check((shift - 9.0).abs() < 1e-6 && (scale - 4.0).abs() < 1e-6, || format!("got {shift}, {scale}"))?;
    Ok(format!("{shift:.9}, {scale:.9}"))
}

fn psnr_hand_values() -> Outcome {
    let flat = |v: u8| LayoutRaster::filled(256, 256, [v, v, v]);
    let off = psnr(&flat(100), &flat(101)).map_err(|e| e.to_string())?;
    let bw = psnr(&flat(0), &flat(255)).map_err(|e| e.to_string())?;
    check((off - 48.13).abs() < 0.01 && bw.abs() < 0.01, || format!("got {off}, {bw}"))?;
    Ok(format!("{off:.4} dB, {bw:.4} dB"))
}

fn round_trip() -> Outcome {
    let legend = ColorLegend::standard();
    let cfg = PipelineConfig::default();
    let mut worst = 1.0f64;
    for seed in 0..50 {
        let plan = random_plan(seed);
        let out = run_pipeline(&render(&plan, 0).map_err(|e| e.to_string())?, &cfg).map_err(|e| e.to_string())?;
        let found = extract_room_masks(&classify_pixels(&out, &legend), MIN_ROOM_PX);
        let recovered: Vec<_> = found
            .iter()
            .map(|(c, m)| (c.canonical_category().expect("room colors map to a category"), m.clone()))
            .collect();
        let f1 = node_f1(
            &extract_adjacency(&recovered, DEFAULT_WALL_PX),
            &AdjacencyGraph::from_plan(&plan),
            NodeMatchMode::default(),
        );
        check(f1 == 1.0, || format!("plan {seed}: node F1 {f1}"))?;
        for room in &plan.rooms {
            let m = room.mask.as_ref().expect("synthetic rooms have masks");
            let best =
                found.iter().filter(|(c, _)| *c == room.color_class()).map(|(_, f)| f.iou(m)).fold(0.0, f64::max);
            worst = worst.min(best);
        }
    }
    check(worst >= 0.9, || format!("worst room IoU {worst}"))?;
    Ok(format!("50 plans, worst room IoU {worst:.4}"))
}

fn idempotence() -> Outcome {
    let cfg = PipelineConfig::default();
    for seed in 0..50 {
        let x = noisy_raster(&random_plan(1000 + seed), seed);
        let once = run_pipeline(&x, &cfg).map_err(|e| e.to_string())?;
        let twice = run_pipeline(&once, &cfg).map_err(|e| e.to_string())?;
        check(once == twice, || format!("input {seed} changed on the second pass"))?;
    }
    Ok("50 noisy inputs".into())
}

fn tokenizer_trend() -> Outcome {
    let start = Instant::now();
    let plans: Vec<_> = (0..500).map(random_plan).collect();
    let corpus = plan_corpus(&plans);
    let psnr_of = |n: usize, k: usize| -> Result<[f64; 2], String> {
        let (_, rows) = evaluate_reconstruction::<f32>(&corpus, n, k, 7, false).map_err(|e| e.to_string())?;
        Ok([rows[0].psnr_db, rows[1].psnr_db])
    };
    let sweep = [psnr_of(8, 64)?, psnr_of(8, 128)?, psnr_of(8, 256)?];
    let coarse = psnr_of(4, 256)?;
    for branch in 0..2 {
        check(sweep[0][branch] <= sweep[1][branch] && sweep[1][branch] <= sweep[2][branch], || {
            format!("branch {branch}: PSNR over K {:?}", sweep.map(|s| s[branch]))
        })?;
        check(sweep[2][branch] > coarse[branch], || {
            format!("branch {branch}: n=8 {} vs n=4 {}", sweep[2][branch], coarse[branch])
        })?;
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "outline {:.2}/{:.2}/{:.2} dB, n=4 {:.2} dB; room {:.2}/{:.2}/{:.2} dB, n=4 {:.2} dB",
        sweep[0][0], sweep[1][0], sweep[2][0], coarse[0], sweep[0][1], sweep[1][1], sweep[2][1], coarse[1]
    ))
}

fn sequence_grammar() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..1000 {
        let n = [1, 2, 4, 8, 16, 32][rng.gen_range(0..6)];
        let (ko, kr) = (rng.gen_range(1..300), rng.gen_range(1..300));
        let cells = n * n;
        let outline: Vec<u32> = (0..cells).map(|_| rng.gen_range(0..ko as u32)).collect();
        let rooms: Vec<(RoomCategory, Vec<u32>)> = (0..rng.gen_range(0..9))
            .map(|_| {
                let c = RoomCategory::ALL[rng.gen_range(0..RoomCategory::ALL.len())];
                (c, (0..cells).map(|_| rng.gen_range(0..kr as u32)).collect())
            })
            .collect();
        let count = rooms.len();
        let seq = TokenSequence::new(n, outline, rooms).map_err(|e| e.to_string())?;
        let vocab = Vocabulary::new(ko, kr);
        let stream = seq.to_stream(&vocab).map_err(|e| e.to_string())?;
        check(stream.len() == 2 + cells + count * (1 + cells) && seq.stream_len() == stream.len(), || {
            format!("case {case}: length {} for n={n}, N={count}", stream.len())
        })?;
        let back = parse_sequence(&stream, &vocab, n).map_err(|e| format!("case {case}: {e}"))?;
        let text = TokenSequence::from_text(&seq.to_text()).map_err(|e| format!("case {case}: {e}"))?;
        check(back == seq && text == seq, || format!("case {case}: round trip differs"))?;
    }
    Ok("1000 sequences".into())
}

fn read_table(path: &Path) -> Result<Vec<(String, String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    check(lines.next() == Some("metric,w/o correction,w/ correction"), || "unexpected header".into())?;
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            check(f.len() == 3, || format!("bad row {l:?}"))?;
            Ok((f[0].into(), f[1].into(), f[2].into()))
        })
        .collect()
}

fn correction_toggle() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for sub in ["gt", "pred"] {
        std::fs::create_dir(dir.path().join(sub)).map_err(|e| e.to_string())?;
    }
    for seed in 0..6 {
        let r = render(&random_plan(seed), 0).map_err(|e| e.to_string())?;
        for sub in ["gt", "pred"] {
            r.save_png(&dir.path().join(sub).join(format!("{seed:04}.png"))).map_err(|e| e.to_string())?;
        }
    }
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_planmetrics"))
        .args(["eval-generation", "--correction-table", "--root"])
        .arg(dir.path())
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    check(status.status.code() == Some(0), || {
        format!("exit {:?}: {}", status.status, String::from_utf8_lossy(&status.stderr))
    })?;
    let rows = read_table(&out.join("correction_table.csv"))?;
    let names: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    for m in ["micro_iou", "macro_iou", "ssim", "psnr", "fid", "ged", "node_f1", "edge_overlap"] {
        check(names.contains(&m), || format!("table lacks {m}"))?;
    }
    for (name, a, b) in &rows {
        let agree = match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => (x - y).abs() <= 1e-12 || x == y,
            _ => a == b,
        };
        check(agree, || format!("{name}: {a} vs {b}"))?;
    }
    for arm in ["without_correction", "with_correction"] {
        check(out.join(arm).join("generation_samples.jsonl").is_file(), || format!("{arm} report missing"))?;
    }
    Ok(format!("{} rows agree", rows.len()))
}

const EXAMPLE: &str = r#"{
  'rooms': [
    {'idx': 0, 'type': 'LivingRoom', 'area': 33, 'width': 6, 'height': 9, 'position': 'east'},
    {'idx': 1, 'type': 'SecondRoom', 'area': 12, 'width': 3, 'height': 4, 'position': 'northwest'},
    {'idx': 2, 'type': 'MasterRoom', 'area': 12, 'width': 3, 'height': 5, 'position': 'southwest'},
    {'idx': 3, 'type': 'StudyRoom', 'area': 11, 'width': 3, 'height': 4, 'position': 'north'},
    {'idx': 4, 'type': 'Bathroom', 'area': 4, 'width': 2, 'height': 2, 'position': 'west'},
    {'idx': 5, 'type': 'Kitchen', 'area': 4, 'width': 2, 'height': 2, 'position': 'northeast'}
  ],
  'edges': [
    {'room1': 5, 'room2': 3, 'relation': 'right-of', 'text': 'Kitchen is right-of StudyRoom'},
    {'room1': 5, 'room2': 0, 'relation': 'above', 'text': 'Kitchen is above LivingRoom'},
    {'room1': 1, 'room2': 3, 'relation': 'left-of', 'text': 'SecondRoom is left-of StudyRoom'},
    {'room1': 1, 'room2': 4, 'relation': 'above', 'text': 'SecondRoom is above Bathroom'},
    {'room1': 4, 'room2': 2, 'relation': 'above', 'text': 'Bathroom is above MasterRoom'}
  ],
  'description': 'The floor plan centers around the spacious Living Room, with surrounding rooms arranged by clear spatial logic.'
}"#;

fn worked_example() -> Outcome {
    let gt = parse_canonical_json(EXAMPLE).map_err(|e| e.to_string())?;
    check(gt.rooms.len() == 6 && gt.edges.len() == 5, || {
        format!("{} rooms, {} edges", gt.rooms.len(), gt.edges.len())
    })?;
    let s = understanding_score(&gt, &gt);
    check(
        (s.success, s.rmr, s.loc_acc, s.area_diff_m2, s.adj_acc, s.rel_acc) == (1.0, 1.0, 1.0, 0.0, 1.0, 1.0),
        || format!("self score {s:?}"),
    )?;
    let mut flipped = gt.clone();
    flipped.edges[1].relation = RelationType::Below;
    let f = understanding_score(&flipped, &gt);
    check((f.rel_acc - 0.8).abs() < 1e-12 && f.adj_acc == 1.0, || format!("flipped score {f:?}"))?;
    Ok(format!("RelAcc {} after one flip", f.rel_acc))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("identity suite", identity_suite),
        ("GED oracle", ged_oracle),
        ("Frechet closed form", frechet_closed_form),
        ("PSNR hand values", psnr_hand_values),
        ("render round trip", round_trip),
        ("post-processing idempotence", idempotence),
        ("tokenizer trend", tokenizer_trend),
        ("sequence grammar", sequence_grammar),
        ("correction toggle", correction_toggle),
        ("worked example", worked_example),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({t:.2}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({t:.2}s): {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
