//! Per-sample records, aggregate tables and the coupling analysis.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use super::{EvalOptions, HarnessError, Task};
use crate::metrics::{pearson_r, MetricError};

pub const UNDERSTANDING_COLUMNS: &[&str] = &["success", "rmr", "loc_acc", "area_diff", "adj_acc", "rel_acc"];
pub const GENERATION_COLUMNS: &[&str] = &["micro_iou", "macro_iou", "ssim", "psnr", "ged", "node_f1", "edge_overlap"];
pub const EDITING_COLUMNS: &[&str] =
    &["delta_iou", "delta_mse", "micro_iou", "macro_iou", "ged", "node_f1", "edge_overlap"];

/// Ceiling applied to PSNR in the capped mean.
pub const PSNR_REPORT_CAP_DB: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub id: String,
    /// Scores aligned with the task columns; `None` when unscorable.
    pub values: Option<Vec<f64>>,
    pub error: Option<String>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub task: Task,
    pub columns: &'static [&'static str],
    pub samples: Vec<SampleOutcome>,
    pub options: EvalOptions,
    /// Fréchet distance between supplied feature sets, generation only.
    pub fid: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub samples: usize,
    pub failed: usize,
    /// `(column, mean over finite values)`, in report column order.
    pub means: Vec<(&'static str, Option<f64>)>,
    pub psnr_inf_excluded: usize,
    pub psnr_capped_mean: Option<f64>,
}

impl Aggregate {
    pub fn mean(&self, column: &str) -> Option<f64> {
        self.means.iter().find(|(c, _)| *c == column).and_then(|(_, v)| *v)
    }
}

fn mean(vals: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = vals.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Plain means of every column; infinite values are left out and counted.
pub fn aggregate(report: &RunReport) -> Aggregate {
    let scored: Vec<&Vec<f64>> = report.samples.iter().filter_map(|s| s.values.as_ref()).collect();
    let means = report
        .columns
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, mean(scored.iter().map(|v| v[i]).filter(|v| v.is_finite()))))
        .collect();
    let psnr_col = report.columns.iter().position(|&c| c == "psnr");
    let (psnr_inf_excluded, psnr_capped_mean) = match psnr_col {
        Some(i) => (
            scored.iter().filter(|v| v[i].is_infinite()).count(),
            mean(scored.iter().map(|v| v[i].min(PSNR_REPORT_CAP_DB))),
        ),
        None => (0, None),
    };
    Aggregate {
        samples: report.samples.len(),
        failed: report.samples.iter().filter(|s| s.error.is_some()).count(),
        means,
        psnr_inf_excluded,
        psnr_capped_mean,
    }
}

/// Linear-interpolation quantile of sorted, nonempty values.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn fmt(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x == f64::INFINITY => "inf".into(),
        Some(x) => format!("{x}"),
    }
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite float serializes")
    } else if v > 0.0 {
        "\"inf\"".into()
    } else {
        "null".into()
    }
}

impl RunReport {
    pub fn failed(&self) -> usize {
        self.samples.iter().filter(|s| s.error.is_some()).count()
    }

    /// 0 when every sample was scored cleanly, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failed() > 0)
    }

    /// One JSON object per sample, keys in column order.
    pub fn jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str("{\"id\":");
            out.push_str(&serde_json::to_string(&s.id).expect("string serializes"));
            for (i, c) in self.columns.iter().enumerate() {
                let v = s.values.as_ref().map_or("null".into(), |v| json_number(v[i]));
                write!(out, ",\"{c}\":{v}").expect("string write");
            }
            let err = s.error.as_ref().map_or("null".into(), |e| serde_json::to_string(e).expect("string serializes"));
            writeln!(out, ",\"error\":{err}}}").expect("string write");
        }
        out
    }

    fn aggregate_columns(&self) -> Vec<(&'static str, String)> {
        let agg = aggregate(self);
        let mut cols = vec![("samples", agg.samples.to_string()), ("failed", agg.failed.to_string())];
        for &(c, v) in &agg.means {
            cols.push((c, fmt(v)));
            if c == "psnr" && self.task == Task::Generation {
                cols.push(("fid", fmt(self.fid)));
            }
        }
        if self.columns.contains(&"psnr") {
            cols.push(("psnr_inf_excluded", agg.psnr_inf_excluded.to_string()));
            cols.push(("psnr_capped60", fmt(agg.psnr_capped_mean)));
        }
        cols
    }

    /// Header row and one row of means.
    pub fn aggregate_csv(&self) -> String {
        let cols = self.aggregate_columns();
        let header: Vec<&str> = cols.iter().map(|c| c.0).collect();
        let row: Vec<&str> = cols.iter().map(|c| c.1.as_str()).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }

    /// Wall-clock per sample, kept apart so the score files stay reproducible.
    pub fn timings_csv(&self) -> String {
        let mut out = String::from("id,elapsed_ms\n");
        for s in &self.samples {
            writeln!(out, "{},{:.3}", s.id, s.elapsed.as_secs_f64() * 1e3).expect("string write");
        }
        out
    }

    /// Spread of every column over finite per-sample values.
    pub fn distribution_csv(&self) -> String {
        let mut out = String::from("metric,count,mean,std,min,p25,median,p75,max\n");
        for (i, c) in self.columns.iter().enumerate() {
            let mut v: Vec<f64> =
                self.samples.iter().filter_map(|s| Some(s.values.as_ref()?[i])).filter(|x| x.is_finite()).collect();
            v.sort_by(f64::total_cmp);
            let stats = match mean(v.iter().copied()) {
                None => vec![None; 7],
                Some(m) => {
                    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
                    let q = |p: f64| Some(quantile(&v, p));
                    vec![Some(m), Some(var.sqrt()), q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)]
                }
            };
            let cells: Vec<String> = stats.into_iter().map(fmt).collect();
            writeln!(out, "{c},{},{}", v.len(), cells.join(",")).expect("string write");
        }
        out
    }

    pub fn config_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "task": self.task,
            "options": self.options,
            "samples": self.samples.len(),
        }))
        .expect("config serializes")
    }

    /// Writes `<task>_samples.jsonl`, `<task>_aggregate.csv`,
    /// `<task>_distribution.csv`, `<task>_timings.csv` and
    /// `<task>_config.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let t = self.task.name();
        std::fs::write(dir.join(format!("{t}_samples.jsonl")), self.jsonl())?;
        std::fs::write(dir.join(format!("{t}_aggregate.csv")), self.aggregate_csv())?;
        std::fs::write(dir.join(format!("{t}_distribution.csv")), self.distribution_csv())?;
        std::fs::write(dir.join(format!("{t}_timings.csv")), self.timings_csv())?;
        std::fs::write(dir.join(format!("{t}_config.json")), self.config_json())
    }
}

/// Side-by-side table of the uncorrected and corrected arms of the same
/// predictions.
pub fn correction_table(without: &RunReport, with: &RunReport) -> String {
    let (a, b) = (without.aggregate_columns(), with.aggregate_columns());
    let mut out = String::from("metric,w/o correction,w/ correction\n");
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        if matches!(*name, "samples" | "failed") {
            continue;
        }
        writeln!(out, "{name},{x},{y}").expect("string write");
    }
    out
}

/// `(id, value)` of one metric from a per-sample JSONL file; null values are
/// skipped and `"inf"` reads as infinity.
pub fn read_metric_column(path: &Path, metric: &str) -> Result<Vec<(String, f64)>, HarnessError> {
    let unreadable = |msg: String| HarnessError::UnreadableFile { path: path.into(), msg };
    let text = std::fs::read_to_string(path).map_err(|e| unreadable(e.to_string()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| unreadable(format!("line {}: {e}", n + 1)))?;
        let id = v.get("id").and_then(|i| i.as_str()).ok_or_else(|| unreadable(format!("line {}: no id", n + 1)))?;
        let field = v.get(metric).ok_or_else(|| unreadable(format!("line {}: no field {metric:?}", n + 1)))?;
        let value = match field {
            serde_json::Value::Number(x) => x.as_f64(),
            serde_json::Value::String(s) if s == "inf" => Some(f64::INFINITY),
            _ => None,
        };
        if let Some(x) = value {
            out.push((id.to_string(), x));
        }
    }
    Ok(out)
}

/// Pearson r over samples present with finite values in both columns, and
/// the paired values as `id,x,y` CSV.
pub fn coupling(xs: &[(String, f64)], ys: &[(String, f64)]) -> Result<(f64, String), MetricError> {
    let ys: BTreeMap<&str, f64> = ys.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let mut pairs: Vec<(&str, f64, f64)> = xs
        .iter()
        .filter_map(|(k, x)| Some((k.as_str(), *x, *ys.get(k.as_str())?)))
        .filter(|(_, x, y)| x.is_finite() && y.is_finite())
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(b.0));
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().map(|p| (p.1, p.2)).unzip();
    let r = pearson_r(&a, &b)?;
    let mut csv = String::from("id,x,y\n");
    for (id, x, y) in pairs {
        writeln!(csv, "{id},{x},{y}").expect("string write");
    }
    Ok((r, csv))
}
