//! JSONL per-frame records, CSV summary tables and SVG plots.

use super::FormatError;
use crate::evaluation::{EdgeBin, FrameError, GateRow, SummaryRow, TrajectoryMetrics};
use crate::solver::LocalizationResult;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// One line of a results file: the frame's localization outcome or the
/// reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame_id: String,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub result: Option<LocalizationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>, FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FormatError::io(path, e))?;
    }
    Ok(BufWriter::new(std::fs::File::create(path).map_err(|e| FormatError::io(path, e))?))
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), FormatError> {
    let mut w = create(path)?;
    for it in items {
        let line = serde_json::to_string(it).map_err(|e| FormatError::invalid(path, e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| FormatError::io(path, e))?;
    }
    w.flush().map_err(|e| FormatError::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    let f = std::fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| FormatError::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_results(path: &Path, results: &[FrameResult]) -> Result<(), FormatError> {
    write_jsonl(path, results)
}

pub fn read_results(path: &Path) -> Result<Vec<FrameResult>, FormatError> {
    read_jsonl(path)
}

pub fn write_frame_errors(path: &Path, errors: &[FrameError]) -> Result<(), FormatError> {
    write_jsonl(path, errors)
}

pub fn read_frame_errors(path: &Path) -> Result<Vec<FrameError>, FormatError> {
    read_jsonl(path)
}

const METRIC_COLS: &str = "N,RMSE_x,RMSE_y,RMSE_2D,Median_2D,P75_2D,pct_lt_2m,pct_gt_5m,bias_x,bias_y";

fn metric_fields(m: &TrajectoryMetrics) -> String {
    format!(
        "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3},{:.6},{:.6}",
        m.n, m.rmse_x, m.rmse_y, m.rmse_2d, m.median_2d, m.p75_2d, m.pct_under_2m, m.pct_over_5m, m.bias[0], m.bias[1]
    )
}

fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| FormatError::io(path, e))?;
    w.flush().map_err(|e| FormatError::io(path, e))
}

/// Per-dataset accuracy table (metres; percentages 0 to 100).
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), FormatError> {
    let mut s = String::new();
    let corrected = rows.first().is_some_and(|r| r.metrics.bias_corrected);
    writeln!(s, "# units: m; bias_corrected={corrected} (mean error vector removed per row's set)").unwrap();
    writeln!(s, "Dataset,{METRIC_COLS}").unwrap();
    for r in rows {
        writeln!(s, "{},{}", r.label, metric_fields(&r.metrics)).unwrap();
    }
    write_text(path, &s)
}

/// Error against edge-count bins; std divides by N.
pub fn write_bins_csv(path: &Path, bins: &[EdgeBin]) -> Result<(), FormatError> {
    let mut s = String::from("# std: population (divide by N); empty bins have N=0\n");
    writeln!(s, "bin_lo,bin_hi,N,mean_2d,std_2d").unwrap();
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    for b in bins {
        writeln!(s, "{},{},{},{},{}", b.lo, b.hi, b.n, opt(b.mean_2d), opt(b.std_2d)).unwrap();
    }
    write_text(path, &s)
}

/// One row per gate threshold; rows that retain no frame carry only the
/// threshold and counts.
pub fn write_gate_csv(path: &Path, rows: &[GateRow]) -> Result<(), FormatError> {
    let mut s = format!("threshold,retained,retained_fraction,{METRIC_COLS}\n");
    for r in rows {
        let m = r.metrics.as_ref().map_or_else(|| ",".repeat(9), metric_fields);
        writeln!(s, "{},{},{:.6},{}", r.threshold, r.retained, r.retained_fraction, m).unwrap();
    }
    write_text(path, &s)
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 56.0;

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone, square: bool) -> Self {
        let span = |v: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            if lo.is_finite() {
                if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) }
            } else {
                (0.0, 1.0)
            }
        };
        let mut x = span(&mut xs.clone());
        let mut y = span(&mut ys.clone());
        if square {
            let r = (x.1 - x.0).max(y.1 - y.0) / 2.0;
            let (mx, my) = ((x.0 + x.1) / 2.0, (y.0 + y.1) / 2.0);
            x = (mx - r, mx + r);
            y = (my - r, my + r);
        }
        Axes { x, y }
    }

    fn px(&self, v: f64) -> f64 {
        PAD + (v - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, v: f64) -> f64 {
        H - PAD - (v - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }

    fn frame(&self, s: &mut String, xlabel: &str, ylabel: &str, title: &str) {
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 14.0).unwrap();
        writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#, H / 2.0, H / 2.0).unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, self.px(xv), H - PAD + 16.0, tick(xv)).unwrap();
            writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, PAD - 6.0, self.py(yv) + 4.0, tick(yv)).unwrap();
        }
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 { format!("{v:.0}") } else { format!("{v:.2}") }
}

/// Scatter of 2D error against edge count; gated frames hollow.
pub fn write_scatter_svg(path: &Path, errors: &[FrameError]) -> Result<(), FormatError> {
    let ax = Axes::fit(
        errors.iter().map(|e| e.edge_count as f64),
        errors.iter().map(FrameError::norm).chain([0.0]),
        false,
    );
    let mut s = String::new();
    ax.frame(&mut s, "edge pixels", "2D error (m)", "Error versus edge count");
    for e in errors {
        let fill = if e.gated { "none" } else { "steelblue" };
        writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{fill}" stroke="steelblue"><title>{}</title></circle>"#,
            ax.px(e.edge_count as f64),
            ax.py(e.norm()),
            e.frame_id
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    write_text(path, &s)
}

/// Truth and estimated offsets per frame, joined by error segments.
pub fn write_trajectory_svg(path: &Path, errors: &[FrameError]) -> Result<(), FormatError> {
    let xs = errors.iter().flat_map(|e| [e.truth.tx, e.estimate.tx]);
    let ys = errors.iter().flat_map(|e| [e.truth.ty, e.estimate.ty]);
    let ax = Axes::fit(xs, ys, true);
    let mut s = String::new();
    ax.frame(&mut s, "east offset (m)", "north offset (m)", "Truth (black) and estimates (red)");
    for e in errors {
        let (tx, ty) = (ax.px(e.truth.tx), ax.py(e.truth.ty));
        let (ex, ey) = (ax.px(e.estimate.tx), ax.py(e.estimate.ty));
        writeln!(s, r#"<line x1="{tx:.1}" y1="{ty:.1}" x2="{ex:.1}" y2="{ey:.1}" stroke="gray"/>"#).unwrap();
        writeln!(s, r#"<circle cx="{tx:.1}" cy="{ty:.1}" r="2.5" fill="black"/>"#).unwrap();
        writeln!(s, r#"<circle cx="{ex:.1}" cy="{ey:.1}" r="2.5" fill="crimson"><title>{}</title></circle>"#, e.frame_id).unwrap();
    }
    s.push_str("</svg>\n");
    write_text(path, &s)
}
