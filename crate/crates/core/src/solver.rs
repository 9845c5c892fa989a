//! Bounded coarse-to-fine grid search over planar translation.

use crate::alignment::{
    build_distance_fields, extract_edges, AlignmentError, ClassEdgeSets, DistanceFieldStack, LossBreakdown, LossConfig,
    Observation, ProjectionIndex,
};
use crate::cloud::SemanticPointCloud;
use crate::geometry::{PlanarTranslation, PreparedView, ProjectedPoint, ViewGeometry, ZBuffer};
use crate::mask::SegmentationMask;
use crate::semantic_map::VoxelEdgeMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid search configuration: {0}")]
    InvalidSearch(String),
    #[error("map is empty")]
    EmptyMap,
    #[error("mask is {mask:?} but the camera image is {camera:?}")]
    MaskSize { mask: (usize, usize), camera: (usize, usize) },
    #[error("no evidence: {0}")]
    NoEvidence(String),
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Half-width of the square search region around the prior (m).
    pub radius: f64,
    /// Grid spacing per stage (m), strictly decreasing.
    pub spacings: Vec<f64>,
    /// Refinement window half-width in units of the previous spacing.
    pub refine_half_width: f64,
    /// Frames with fewer observed edge pixels are flagged as gated.
    pub gate_threshold: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            radius: 30.0,
            spacings: vec![4.0, 1.0, 0.25],
            refine_half_width: 2.0,
            gate_threshold: 8000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidSearch(m.into()));
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius must be positive");
        }
        if self.spacings.is_empty() {
            return bad("at least one stage spacing is required");
        }
        if !self.spacings.iter().all(|&s| s > 0.0 && s.is_finite()) {
            return bad("spacings must be positive");
        }
        if self.spacings.windows(2).any(|w| w[1] >= w[0]) {
            return bad("spacings must be strictly decreasing");
        }
        if !(self.refine_half_width > 0.0 && self.refine_half_width.is_finite()) {
            return bad("refine half-width must be positive");
        }
        Ok(())
    }

    pub fn final_spacing(&self) -> f64 {
        *self.spacings.last().expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub spacing: f64,
    pub best: PlanarTranslation,
    pub loss: f64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub t_star: PlanarTranslation,
    pub loss: f64,
    pub forward: Option<f64>,
    pub reverse: Option<f64>,
    pub edge_count: usize,
    pub gated: bool,
    pub gate_reason: Option<String>,
    pub trace: Vec<StageTrace>,
    pub wall_time_s: f64,
}

/// Edge sets and distance fields of one observed mask.
#[derive(Debug, Clone)]
pub struct FrameEvidence {
    pub edges: ClassEdgeSets,
    pub fields: DistanceFieldStack,
}

impl FrameEvidence {
    pub fn from_mask(mask: &SegmentationMask, d_max: f64) -> Self {
        let edges = extract_edges(mask);
        let fields = build_distance_fields(&edges, d_max);
        Self { edges, fields }
    }
}

/// Per-worker buffers for candidate evaluation.
pub struct Scratch {
    zbuf: ZBuffer,
    entries: Vec<ProjectedPoint>,
    index: ProjectionIndex,
}

impl Scratch {
    pub fn new(view: &PreparedView) -> Self {
        let k = view.intrinsics();
        Self {
            zbuf: ZBuffer::new(k.width, k.height),
            entries: Vec::new(),
            index: ProjectionIndex::default(),
        }
    }
}

/// Loss as a function of the candidate translation for one frame. A
/// restricted objective only renders points that can be visible inside its
/// box and returns bit-identical values there.
#[derive(Clone)]
pub struct Objective<'a> {
    view: &'a PreparedView,
    obs: Observation<'a>,
    subset: Option<Vec<u32>>,
}

impl<'a> Objective<'a> {
    pub fn new(view: &'a PreparedView, evidence: &'a FrameEvidence, cfg: &'a LossConfig) -> Result<Self, SolverError> {
        let k = view.intrinsics();
        if (evidence.edges.width(), evidence.edges.height()) != (k.width, k.height) {
            return Err(SolverError::MaskSize {
                mask: (evidence.edges.width(), evidence.edges.height()),
                camera: (k.width, k.height),
            });
        }
        let obs = Observation::new(&evidence.edges, &evidence.fields, cfg)?;
        Ok(Self { view, obs, subset: None })
    }

    pub fn restrict(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self {
            view: self.view,
            obs: self.obs.clone(),
            subset: Some(self.view.cull(x0, x1, y0, y1)),
        }
    }

    pub fn loss_at(&self, t: PlanarTranslation, scratch: &mut Scratch) -> Result<LossBreakdown, AlignmentError> {
        self.view
            .render_into(t, self.subset.as_deref(), &mut scratch.zbuf, &mut scratch.entries);
        self.obs.evaluate(&scratch.entries, &mut scratch.index)
    }
}

/// Deterministic ordering: loss, then distance from the prior, then
/// lexicographic `(tx, ty)`.
pub fn candidate_cmp(a: (f64, PlanarTranslation), b: (f64, PlanarTranslation)) -> Ordering {
    let n = |t: PlanarTranslation| t.tx * t.tx + t.ty * t.ty;
    a.0.total_cmp(&b.0)
        .then(n(a.1).total_cmp(&n(b.1)))
        .then(a.1.tx.total_cmp(&b.1.tx))
        .then(a.1.ty.total_cmp(&b.1.ty))
}

/// Lattice values `i * step` inside `[lo, hi]`.
pub fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let eps = 1e-9;
    let i0 = (lo / step - eps).ceil() as i64;
    let i1 = (hi / step + eps).floor() as i64;
    (i0..=i1).map(|i| i as f64 * step).collect()
}

struct StageOutcome {
    best: PlanarTranslation,
    breakdown: LossBreakdown,
    candidates: usize,
}

/// Evaluate a rectangular candidate grid (plus extra points) and return the
/// minimum under [`candidate_cmp`]. Candidates whose loss cannot be
/// evaluated count as `+inf`.
fn search_grid(
    objective: &Objective,
    xs: &[f64],
    ys: &[f64],
    extra: Option<PlanarTranslation>,
) -> Option<StageOutcome> {
    let mut rows: Vec<(f64, Vec<PlanarTranslation>)> = ys
        .iter()
        .map(|&ty| (ty, xs.iter().map(|&tx| PlanarTranslation::new(tx, ty)).collect()))
        .collect();
    if let Some(e) = extra {
        let present = rows.iter().any(|(_, r)| r.contains(&e));
        if !present {
            rows.push((e.ty, vec![e]));
        }
    }
    let jobs: Vec<(Objective, Vec<PlanarTranslation>)> = rows
        .into_iter()
        .map(|(ty, row)| {
            let x0 = row.iter().map(|t| t.tx).fold(f64::INFINITY, f64::min);
            let x1 = row.iter().map(|t| t.tx).fold(f64::NEG_INFINITY, f64::max);
            (objective.restrict(x0, x1, ty, ty), row)
        })
        .collect();
    let flat: Vec<(usize, PlanarTranslation)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, (_, row))| row.iter().map(move |&t| (j, t)))
        .collect();
    let evaluated: Vec<(PlanarTranslation, Option<LossBreakdown>)> = flat
        .par_iter()
        .map_init(
            || Scratch::new(objective.view),
            |scratch, &(j, t)| (t, jobs[j].0.loss_at(t, scratch).ok().filter(|b| !b.total.is_nan())),
        )
        .collect();
    let candidates = evaluated.len();
    let mut best: Option<(PlanarTranslation, LossBreakdown)> = None;
    for (t, b) in evaluated {
        let Some(b) = b else { continue };
        let better = match &best {
            None => true,
            Some((bt, bb)) => candidate_cmp((b.total, t), (bb.total, *bt)) == Ordering::Less,
        };
        if better {
            best = Some((t, b));
        }
    }
    best.map(|(best, breakdown)| StageOutcome {
        best,
        breakdown,
        candidates,
    })
}

/// Localize one frame against a prepared map view.
pub fn localize_prepared(
    view: &PreparedView,
    mask: &SegmentationMask,
    loss_cfg: &LossConfig,
    search: &SearchConfig,
) -> Result<LocalizationResult, SolverError> {
    let start = Instant::now();
    search.validate()?;
    loss_cfg.validate()?;
    if view.is_empty() {
        return Err(SolverError::EmptyMap);
    }
    let k = view.intrinsics();
    if (mask.width(), mask.height()) != (k.width, k.height) {
        return Err(SolverError::MaskSize {
            mask: (mask.width(), mask.height()),
            camera: (k.width, k.height),
        });
    }
    let evidence = FrameEvidence::from_mask(mask, loss_cfg.d_max);
    let objective = Objective::new(view, &evidence, loss_cfg)?;
    let r = search.radius;

    let mut trace = Vec::with_capacity(search.spacings.len());
    let mut current: Option<StageOutcome> = None;
    let mut prev_spacing = 0.0;
    for (s, &spacing) in search.spacings.iter().enumerate() {
        let (xs, ys, extra) = match &current {
            None => (lattice(-r, r, spacing), lattice(-r, r, spacing), None),
            Some(c) => {
                let hw = search.refine_half_width * prev_spacing;
                let b = c.best;
                (
                    lattice((b.tx - hw).max(-r), (b.tx + hw).min(r), spacing),
                    lattice((b.ty - hw).max(-r), (b.ty + hw).min(r), spacing),
                    Some(b),
                )
            }
        };
        let outcome = search_grid(&objective, &xs, &ys, extra).ok_or_else(|| {
            SolverError::NoEvidence(format!("no candidate in stage {s} produced a finite loss"))
        })?;
        trace.push(StageTrace {
            spacing,
            best: outcome.best,
            loss: outcome.breakdown.total,
            candidates: outcome.candidates,
        });
        current = Some(outcome);
        prev_spacing = spacing;
    }
    let best = current.expect("at least one stage");
    let edge_count = evidence.edges.total();
    let gated = edge_count < search.gate_threshold;
    Ok(LocalizationResult {
        t_star: best.best,
        loss: best.breakdown.total,
        forward: best.breakdown.forward,
        reverse: best.breakdown.reverse,
        edge_count,
        gated,
        gate_reason: gated.then(|| format!("edge count {edge_count} below threshold {}", search.gate_threshold)),
        trace,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Localize against a labelled point map (any cloud, pruned or not).
pub fn localize_points(
    map: &SemanticPointCloud,
    mask: &SegmentationMask,
    view: &ViewGeometry,
    loss_cfg: &LossConfig,
    search: &SearchConfig,
) -> Result<LocalizationResult, SolverError> {
    if map.is_empty() {
        return Err(SolverError::EmptyMap);
    }
    localize_prepared(&PreparedView::new(map, view), mask, loss_cfg, search)
}

pub fn localize_frame(
    map: &VoxelEdgeMap,
    mask: &SegmentationMask,
    view: &ViewGeometry,
    loss_cfg: &LossConfig,
    search: &SearchConfig,
) -> Result<LocalizationResult, SolverError> {
    localize_points(&map.to_cloud(), mask, view, loss_cfg, search)
}

/// Independent per-frame localization; errors are returned in place and
/// results keep the input order.
pub fn localize_trajectory(
    map: &VoxelEdgeMap,
    frames: &[(SegmentationMask, ViewGeometry)],
    loss_cfg: &LossConfig,
    search: &SearchConfig,
) -> Vec<Result<LocalizationResult, SolverError>> {
    let cloud = map.to_cloud();
    frames
        .par_iter()
        .map(|(mask, view)| localize_points(&cloud, mask, view, loss_cfg, search))
        .collect()
}
