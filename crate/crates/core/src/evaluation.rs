//! Trajectory accuracy statistics: bias-corrected RMSE, percentile and
//! threshold rates, edge-count binning and evidence-gate sweeps.
//!
//! Conventions: bias correction subtracts the mean error vector of the
//! evaluated set; standard deviations divide by N; percentiles interpolate
//! linearly between order statistics.

use crate::geometry::PlanarTranslation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("no frames to evaluate")]
    Empty,
    #[error("frame {0}: non-finite error")]
    NonFinite(String),
    #[error("bin width must be positive, got {0}")]
    BinWidth(f64),
    #[error("gate threshold must be non-negative, got {0}")]
    Threshold(f64),
}

/// Per-frame horizontal error `estimate - truth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameError {
    pub frame_id: String,
    pub estimate: PlanarTranslation,
    pub truth: PlanarTranslation,
    pub error: [f64; 2],
    pub edge_count: usize,
    pub gated: bool,
    /// Dataset (flight) the frame belongs to, for per-dataset bias.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

impl FrameError {
    pub fn new(
        frame_id: impl Into<String>,
        estimate: PlanarTranslation,
        truth: PlanarTranslation,
        edge_count: usize,
        gated: bool,
    ) -> Result<Self, EvalError> {
        let frame_id = frame_id.into();
        let error = [estimate.tx - truth.tx, estimate.ty - truth.ty];
        if !(error[0].is_finite() && error[1].is_finite()) {
            return Err(EvalError::NonFinite(frame_id));
        }
        Ok(Self {
            frame_id,
            estimate,
            truth,
            error,
            edge_count,
            gated,
            dataset: None,
        })
    }

    pub fn with_dataset(mut self, dataset: impl Into<String>) -> Self {
        self.dataset = Some(dataset.into());
        self
    }

    pub fn norm(&self) -> f64 {
        self.error[0].hypot(self.error[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub n: usize,
    pub rmse_x: f64,
    pub rmse_y: f64,
    pub rmse_2d: f64,
    pub median_2d: f64,
    pub p75_2d: f64,
    /// Percentage (0 to 100) of frames with 2D error below 2 m.
    pub pct_under_2m: f64,
    /// Percentage (0 to 100) of frames with 2D error above 5 m.
    pub pct_over_5m: f64,
    /// Mean error vector of the input (before any correction).
    pub bias: [f64; 2],
    pub bias_corrected: bool,
}

/// Linear interpolation between order statistics of a sorted slice, with
/// rank `q * (n - 1)`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty set");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean_vector(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len() as f64;
    let (sx, sy) = v.iter().fold((0.0, 0.0), |(a, b), e| (a + e[0], b + e[1]));
    [sx / n, sy / n]
}

/// Statistics of already-corrected (or raw) error vectors.
fn summarize(v: &[[f64; 2]], bias: [f64; 2], bias_corrected: bool) -> TrajectoryMetrics {
    let n = v.len() as f64;
    let msx = v.iter().map(|e| e[0] * e[0]).sum::<f64>() / n;
    let msy = v.iter().map(|e| e[1] * e[1]).sum::<f64>() / n;
    let mut norms: Vec<f64> = v.iter().map(|e| e[0].hypot(e[1])).collect();
    norms.sort_by(f64::total_cmp);
    let pct = |pred: &dyn Fn(f64) -> bool| 100.0 * norms.iter().filter(|&&d| pred(d)).count() as f64 / n;
    TrajectoryMetrics {
        n: v.len(),
        rmse_x: msx.sqrt(),
        rmse_y: msy.sqrt(),
        rmse_2d: (msx + msy).sqrt(),
        median_2d: percentile(&norms, 0.5),
        p75_2d: percentile(&norms, 0.75),
        pct_under_2m: pct(&|d| d < 2.0),
        pct_over_5m: pct(&|d| d > 5.0),
        bias,
        bias_corrected,
    }
}

/// Error vectors with the set mean removed when `bias_correct`.
fn corrected(errors: &[FrameError], bias_correct: bool) -> (Vec<[f64; 2]>, [f64; 2]) {
    let raw: Vec<[f64; 2]> = errors.iter().map(|e| e.error).collect();
    let bias = mean_vector(&raw);
    if !bias_correct {
        return (raw, bias);
    }
    let v = raw.iter().map(|e| [e[0] - bias[0], e[1] - bias[1]]).collect();
    (v, bias)
}

pub fn compute_metrics(errors: &[FrameError], bias_correct: bool) -> Result<TrajectoryMetrics, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::Empty);
    }
    let (v, bias) = corrected(errors, bias_correct);
    Ok(summarize(&v, bias, bias_correct))
}

/// One edge-count bin `[lo, hi)` with statistics of the 2D error norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeBin {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// `None` for empty bins.
    pub mean_2d: Option<f64>,
    pub std_2d: Option<f64>,
}

/// Partition frames into edge-count bins `[origin + i*width, origin + (i+1)*width)`.
/// Rows run contiguously from the lowest to the highest occupied bin; bins in
/// between with no frames have `n = 0`. Bias correction, when requested, is
/// over the whole input set before binning.
pub fn bin_by_edges(
    errors: &[FrameError],
    width: f64,
    origin: f64,
    bias_correct: bool,
) -> Result<Vec<EdgeBin>, EvalError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(EvalError::BinWidth(width));
    }
    if errors.is_empty() {
        return Ok(Vec::new());
    }
    let (v, _) = corrected(errors, bias_correct);
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (e, c) in errors.iter().zip(&v) {
        let i = ((e.edge_count as f64 - origin) / width).floor() as i64;
        bins.entry(i).or_default().push(c[0].hypot(c[1]));
    }
    let first = *bins.keys().next().expect("non-empty");
    let last = *bins.keys().next_back().expect("non-empty");
    Ok((first..=last)
        .map(|i| {
            let lo = origin + i as f64 * width;
            let norms = bins.get(&i).map(Vec::as_slice).unwrap_or(&[]);
            let (mean, std) = if norms.is_empty() {
                (None, None)
            } else {
                let n = norms.len() as f64;
                let m = norms.iter().sum::<f64>() / n;
                let var = norms.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / n;
                (Some(m), Some(var.sqrt()))
            };
            EdgeBin {
                lo,
                hi: lo + width,
                n: norms.len(),
                mean_2d: mean,
                std_2d: std,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub threshold: usize,
    pub retained: usize,
    pub retained_fraction: f64,
    /// `None` when the threshold removes every frame.
    pub metrics: Option<TrajectoryMetrics>,
}

/// Metrics over frames with at least `threshold` edge pixels, per threshold.
pub fn gate_sweep(errors: &[FrameError], thresholds: &[usize], bias_correct: bool) -> Result<Vec<GateRow>, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(thresholds
        .iter()
        .map(|&threshold| {
            let kept: Vec<FrameError> = errors.iter().filter(|e| e.edge_count >= threshold).cloned().collect();
            GateRow {
                threshold,
                retained: kept.len(),
                retained_fraction: kept.len() as f64 / errors.len() as f64,
                metrics: compute_metrics(&kept, bias_correct).ok(),
            }
        })
        .collect())
}

/// Parse a threshold from text, rejecting negatives and fractions.
pub fn parse_threshold(s: &str) -> Result<usize, EvalError> {
    let v: f64 = s.trim().parse().map_err(|_| EvalError::Threshold(f64::NAN))?;
    if !(v >= 0.0) || v.fract() != 0.0 {
        return Err(EvalError::Threshold(v));
    }
    Ok(v as usize)
}

/// A labelled metrics row of a dataset summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub metrics: TrajectoryMetrics,
}

/// Per-dataset rows plus two totals: one with each frame corrected by its
/// own dataset's mean, one with a single global mean. Frames without a
/// dataset are grouped under `"default"`.
pub fn dataset_summary(errors: &[FrameError], bias_correct: bool) -> Result<Vec<SummaryRow>, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut groups: BTreeMap<&str, Vec<FrameError>> = BTreeMap::new();
    for e in errors {
        groups.entry(e.dataset.as_deref().unwrap_or("default")).or_default().push(e.clone());
    }
    let mut rows = Vec::new();
    let mut pooled = Vec::with_capacity(errors.len());
    for (name, group) in &groups {
        let (v, _) = corrected(group, bias_correct);
        pooled.extend(v);
        rows.push(SummaryRow {
            label: name.to_string(),
            metrics: compute_metrics(group, bias_correct)?,
        });
    }
    let raw: Vec<[f64; 2]> = errors.iter().map(|e| e.error).collect();
    let bias = mean_vector(&raw);
    rows.push(SummaryRow {
        label: "Total (per-dataset bias)".into(),
        metrics: summarize(&pooled, bias, bias_correct),
    });
    rows.push(SummaryRow {
        label: "Total (global bias)".into(),
        metrics: compute_metrics(errors, bias_correct)?,
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fe(id: usize, e: [f64; 2], edges: usize) -> FrameError {
        FrameError::new(
            format!("f{id}"),
            PlanarTranslation::new(e[0], e[1]),
            PlanarTranslation::ZERO,
            edges,
            false,
        )
        .unwrap()
    }

    #[test]
    fn symmetric_pair() {
        let m = compute_metrics(&[fe(0, [1.0, 0.0], 0), fe(1, [-1.0, 0.0], 0)], true).unwrap();
        assert_eq!(m.bias, [0.0, 0.0]);
        assert_eq!(m.rmse_2d, 1.0);
        assert_eq!(m.median_2d, 1.0);
    }

    #[test]
    fn mean_removal() {
        let m = compute_metrics(&[fe(0, [2.0, 0.0], 0), fe(1, [4.0, 0.0], 0)], true).unwrap();
        assert_eq!(m.bias, [3.0, 0.0]);
        assert_eq!(m.rmse_2d, 1.0);
        let raw = compute_metrics(&[fe(0, [2.0, 0.0], 0), fe(1, [4.0, 0.0], 0)], false).unwrap();
        assert_eq!(raw.rmse_2d, 10f64.sqrt());
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.75), 3.25);
        assert_eq!(percentile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(compute_metrics(&[], true), Err(EvalError::Empty));
        assert!(FrameError::new("x", PlanarTranslation::new(f64::NAN, 0.0), PlanarTranslation::ZERO, 0, false).is_err());
    }

    /// Textbook formulas evaluated directly, one statistic at a time.
    fn oracle(errs: &[[f64; 2]]) -> (f64, f64, f64, f64, f64, f64, f64) {
        let n = errs.len() as f64;
        let mx = errs.iter().map(|e| e[0]).sum::<f64>() / n;
        let my = errs.iter().map(|e| e[1]).sum::<f64>() / n;
        let dx: Vec<f64> = errs.iter().map(|e| e[0] - mx).collect();
        let dy: Vec<f64> = errs.iter().map(|e| e[1] - my).collect();
        let rx = (dx.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
        let ry = (dy.iter().map(|y| y * y).sum::<f64>() / n).sqrt();
        let mut d: Vec<f64> = dx.iter().zip(&dy).map(|(x, y)| (x * x + y * y).sqrt()).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let interp = |q: f64| {
            let r = q * (d.len() - 1) as f64;
            let (i, f) = (r as usize, r - r.floor());
            if i + 1 < d.len() { d[i] * (1.0 - f) + d[i + 1] * f } else { d[i] }
        };
        let under = d.iter().filter(|&&v| v < 2.0).count() as f64 * 100.0 / n;
        let over = d.iter().filter(|&&v| v > 5.0).count() as f64 * 100.0 / n;
        let r2 = (d.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        (rx, ry, r2, interp(0.5), interp(0.75), under, over)
    }

    #[test]
    fn matches_formula_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(1..60);
            let errs: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)])
                .collect();
            let frames: Vec<FrameError> = errs.iter().enumerate().map(|(i, e)| fe(i, *e, 0)).collect();
            let m = compute_metrics(&frames, true).unwrap();
            let (rx, ry, r2, med, p75, under, over) = oracle(&errs);
            assert_relative_eq!(m.rmse_x, rx, epsilon = 1e-12);
            assert_relative_eq!(m.rmse_y, ry, epsilon = 1e-12);
            assert_relative_eq!(m.rmse_2d, r2, epsilon = 1e-12);
            assert_relative_eq!(m.median_2d, med, epsilon = 1e-12);
            assert_relative_eq!(m.p75_2d, p75, epsilon = 1e-12);
            assert_eq!(m.pct_under_2m, under);
            assert_eq!(m.pct_over_5m, over);
        }
    }

    #[test]
    fn single_bin_equals_global() {
        let frames: Vec<FrameError> = (0..10).map(|i| fe(i, [i as f64, 1.0], 100 + i)).collect();
        let bins = bin_by_edges(&frames, 5500.0, 0.0, true).unwrap();
        assert_eq!(bins.len(), 1);
        let (v, _) = corrected(&frames, true);
        let d: Vec<f64> = v.iter().map(|e| e[0].hypot(e[1])).collect();
        let m = d.iter().sum::<f64>() / 10.0;
        let s = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 10.0).sqrt();
        assert_eq!(bins[0].n, 10);
        assert_relative_eq!(bins[0].mean_2d.unwrap(), m, epsilon = 1e-12);
        assert_relative_eq!(bins[0].std_2d.unwrap(), s, epsilon = 1e-12);
    }

    #[test]
    fn two_bins_with_gap() {
        let frames = [fe(0, [1.0, 0.0], 1800), fe(1, [3.0, 0.0], 13000)];
        let bins = bin_by_edges(&frames, 5500.0, 1749.0, false).unwrap();
        assert_eq!(bins.len(), 3);
        assert_eq!((bins[0].lo, bins[0].hi), (1749.0, 7249.0));
        assert_eq!((bins[0].n, bins[1].n, bins[2].n), (1, 0, 1));
        assert_eq!(bins[0].std_2d, Some(0.0));
        assert_eq!(bins[1].mean_2d, None);
        assert_eq!(bins[2].mean_2d, Some(3.0));
        // Counts below the origin fall into negative bins.
        let below = bin_by_edges(&[fe(0, [0.0, 0.0], 10)], 100.0, 50.0, false).unwrap();
        assert_eq!(below[0].lo, -50.0);
        assert!(bin_by_edges(&frames, 0.0, 0.0, false).is_err());
    }

    #[test]
    fn bins_match_partition_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let frames: Vec<FrameError> = (0..40)
                .map(|i| fe(i, [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)], rng.random_range(0..20000)))
                .collect();
            let (width, origin) = (rng.random_range(500.0..6000.0), rng.random_range(-2000.0..2000.0));
            let bins = bin_by_edges(&frames, width, origin, false).unwrap();
            for b in &bins {
                let members: Vec<f64> = frames
                    .iter()
                    .filter(|f| (f.edge_count as f64) >= b.lo && (f.edge_count as f64) < b.hi)
                    .map(FrameError::norm)
                    .collect();
                assert_eq!(b.n, members.len());
                if let Some(m) = b.mean_2d {
                    assert_relative_eq!(m, members.iter().sum::<f64>() / members.len() as f64, epsilon = 1e-12);
                }
            }
            assert_eq!(bins.iter().map(|b| b.n).sum::<usize>(), frames.len());
        }
    }

    #[test]
    fn gate_sweep_rows() {
        // Error shrinks as evidence grows.
        let frames: Vec<FrameError> = (0..50)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                fe(i, [s * 100.0 / (i as f64 + 1.0), 0.0], 1000 * i)
            })
            .collect();
        let rows = gate_sweep(&frames, &[0, 5000, 10000, 20000, 40000, 10_000_000], true).unwrap();
        assert_eq!(rows[0].metrics, Some(compute_metrics(&frames, true).unwrap()));
        assert_eq!(rows[0].retained_fraction, 1.0);
        let rmse: Vec<f64> = rows.iter().filter_map(|r| r.metrics.as_ref().map(|m| m.rmse_2d)).collect();
        assert!(rmse.windows(2).all(|w| w[1] <= w[0]), "{rmse:?}");
        let last = rows.last().unwrap();
        assert_eq!((last.retained, last.metrics.is_none()), (0, true));
    }

    #[test]
    fn thresholds_parse() {
        assert_eq!(parse_threshold("8000"), Ok(8000));
        assert!(parse_threshold("-1").is_err());
        assert!(parse_threshold("1.5").is_err());
    }

    #[test]
    fn dataset_rows() {
        let frames = vec![
            fe(0, [2.0, 0.0], 0).with_dataset("a"),
            fe(1, [4.0, 0.0], 0).with_dataset("a"),
            fe(2, [-1.0, 0.0], 0).with_dataset("b"),
            fe(3, [1.0, 0.0], 0).with_dataset("b"),
        ];
        let rows = dataset_summary(&frames, true).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["a", "b", "Total (per-dataset bias)", "Total (global bias)"]);
        assert_eq!(rows[2].metrics.rmse_2d, 1.0);
        // Global mean (1.5, 0): residuals 0.5, 2.5, -2.5, -0.5.
        assert_relative_eq!(rows[3].metrics.rmse_2d, (13.0f64 / 4.0).sqrt(), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn rmse_decomposes_and_bias_vanishes(errs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..80)) {
            let frames: Vec<FrameError> = errs.iter().enumerate().map(|(i, &(x, y))| fe(i, [x, y], i)).collect();
            let m = compute_metrics(&frames, true).unwrap();
            prop_assert!((m.rmse_2d.powi(2) - (m.rmse_x.powi(2) + m.rmse_y.powi(2))).abs() <= 1e-9);
            prop_assert!(m.median_2d <= m.p75_2d);
            let (v, _) = corrected(&frames, true);
            let mv = mean_vector(&v);
            prop_assert!(mv[0].abs() < 1e-9 && mv[1].abs() < 1e-9);
            let rows = gate_sweep(&frames, &[0], true).unwrap();
            prop_assert_eq!(rows[0].metrics.as_ref(), Some(&m));
        }
    }
}
