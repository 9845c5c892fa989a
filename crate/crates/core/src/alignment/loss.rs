use super::distance::DistanceFieldStack;
use super::edges::ClassEdgeSets;
use super::AlignmentError;
use crate::crossmodal::ConfusionMatrix;
use crate::geometry::{ProjectedPoint, ProjectedSemanticPoints};
use serde::{Deserialize, Serialize};

/// How the reverse term spreads an observed edge label over map classes
/// when a confusion matrix is supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReverseWeighting {
    /// `W[j][k] = Pr(true = k | predicted = j)` from the confusion matrix
    /// under a uniform class prior: `C[k][j] / Σ_m C[m][j]`.
    #[default]
    Posterior,
    /// `W[j][k] = C[j][k]`, the same rows as the forward term.
    Row,
}

impl ReverseWeighting {
    pub fn formula(self) -> &'static str {
        match self {
            ReverseWeighting::Posterior => "W[j][k] = C[k][j] / sum_m C[m][j] (uniform prior)",
            ReverseWeighting::Row => "W[j][k] = C[j][k]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    /// Huber threshold (px).
    pub delta: f64,
    /// Distance clamp applied before the penalty (px).
    pub d_max: f64,
    pub lambda_f: f64,
    pub lambda_r: f64,
    pub confusion: Option<ConfusionMatrix>,
    pub reverse_weighting: ReverseWeighting,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            delta: 2.0,
            d_max: 5.0,
            lambda_f: 1.0,
            lambda_r: 1.0,
            confusion: None,
            reverse_weighting: ReverseWeighting::Posterior,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), AlignmentError> {
        let bad = |m: &str| Err(AlignmentError::InvalidConfig(m.to_string()));
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta must be positive");
        }
        if !(self.d_max.is_finite() && self.d_max >= self.delta) {
            return bad("d_max must be finite and >= delta");
        }
        if !(self.lambda_f >= 0.0 && self.lambda_r >= 0.0)
            || !(self.lambda_f.is_finite() && self.lambda_r.is_finite())
        {
            return bad("term weights must be finite and non-negative");
        }
        if self.lambda_f == 0.0 && self.lambda_r == 0.0 {
            return bad("lambda_f and lambda_r cannot both be zero");
        }
        Ok(())
    }

    /// Largest value either term can take.
    pub fn max_penalty(&self) -> f64 {
        huber(self.d_max, self.delta)
    }
}

/// Huber penalty: `d²/2` for `d ≤ δ`, `δ(d − δ/2)` beyond.
#[inline]
pub fn huber(d: f64, delta: f64) -> f64 {
    if d <= delta {
        0.5 * d * d
    } else {
        delta * (d - 0.5 * delta)
    }
}

/// Sparse class-weight rows derived from a confusion matrix.
#[derive(Debug, Clone, PartialEq)]
struct WeightRows(Vec<Vec<(usize, f64)>>);

impl WeightRows {
    fn forward(c: &ConfusionMatrix) -> Self {
        let k = c.num_classes();
        Self(
            (0..k)
                .map(|y| (0..k).map(|j| (j, c.get(y, j))).filter(|&(_, w)| w != 0.0).collect())
                .collect(),
        )
    }

    fn reverse(c: &ConfusionMatrix, mode: ReverseWeighting) -> Self {
        match mode {
            ReverseWeighting::Row => Self::forward(c),
            ReverseWeighting::Posterior => {
                let k = c.num_classes();
                Self(
                    (0..k)
                        .map(|j| {
                            let col: f64 = (0..k).map(|m| c.get(m, j)).sum();
                            if col <= 0.0 {
                                vec![(j, 1.0)]
                            } else {
                                (0..k)
                                    .map(|t| (t, c.get(t, j) / col))
                                    .filter(|&(_, w)| w != 0.0)
                                    .collect()
                            }
                        })
                        .collect(),
                )
            }
        }
    }
}

/// Uniform bucket grid over projected points, one bucket set per class.
/// Cell size equals the query radius so a 3x3 block covers every point
/// within range.
#[derive(Debug, Clone, Default)]
pub struct ProjectionIndex {
    cell: f64,
    gw: usize,
    gh: usize,
    num_classes: usize,
    starts: Vec<u32>,
    points: Vec<[f64; 2]>,
    fill: Vec<u32>,
}

impl ProjectionIndex {
    pub fn build(
        &mut self,
        entries: &[ProjectedPoint],
        width: usize,
        height: usize,
        num_classes: usize,
        cell: f64,
    ) {
        self.cell = cell;
        self.gw = ((width as f64 / cell).ceil() as usize).max(1);
        self.gh = ((height as f64 / cell).ceil() as usize).max(1);
        self.num_classes = num_classes;
        let ncell = self.gw * self.gh * num_classes;
        self.starts.clear();
        self.starts.resize(ncell + 1, 0);
        for e in entries {
            let c = self.cell_of(e.class as usize, e.u, e.v);
            self.starts[c + 1] += 1;
        }
        for i in 0..ncell {
            self.starts[i + 1] += self.starts[i];
        }
        self.fill.clear();
        self.fill.extend_from_slice(&self.starts[..ncell]);
        self.points.clear();
        self.points.resize(entries.len(), [0.0; 2]);
        for e in entries {
            let c = self.cell_of(e.class as usize, e.u, e.v);
            self.points[self.fill[c] as usize] = [e.u, e.v];
            self.fill[c] += 1;
        }
    }

    #[inline]
    fn cell_of(&self, k: usize, u: f64, v: f64) -> usize {
        let cx = ((u / self.cell) as usize).min(self.gw - 1);
        let cy = ((v / self.cell) as usize).min(self.gh - 1);
        (k * self.gh + cy) * self.gw + cx
    }

    /// Distance from `(x, y)` to the nearest indexed point of class `k`,
    /// clamped at the cell size.
    #[inline]
    pub fn nearest_clamped(&self, k: usize, x: f64, y: f64) -> f64 {
        let cx = ((x / self.cell) as usize).min(self.gw - 1);
        let cy = ((y / self.cell) as usize).min(self.gh - 1);
        let mut best = self.cell * self.cell;
        for gy in cy.saturating_sub(1)..=(cy + 1).min(self.gh - 1) {
            let base = (k * self.gh + gy) * self.gw;
            let lo = self.starts[base + cx.saturating_sub(1)] as usize;
            let hi = self.starts[base + (cx + 1).min(self.gw - 1) + 1] as usize;
            for p in &self.points[lo..hi] {
                let dx = p[0] - x;
                let dy = p[1] - y;
                let d2 = dx * dx + dy * dy;
                if d2 < best {
                    best = d2;
                }
            }
        }
        best.sqrt().min(self.cell)
    }
}

/// Value of each term and the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub forward: Option<f64>,
    pub reverse: Option<f64>,
    pub total: f64,
}

/// Observation side of the objective (edges, their distance fields and the
/// loss configuration), prepared once per frame and shared read-only by all
/// candidate evaluations.
#[derive(Debug, Clone)]
pub struct Observation<'a> {
    edges: &'a ClassEdgeSets,
    fields: &'a DistanceFieldStack,
    cfg: &'a LossConfig,
    forward_rows: Option<WeightRows>,
    reverse_rows: Option<WeightRows>,
}

impl<'a> Observation<'a> {
    pub fn new(
        edges: &'a ClassEdgeSets,
        fields: &'a DistanceFieldStack,
        cfg: &'a LossConfig,
    ) -> Result<Self, AlignmentError> {
        cfg.validate()?;
        if edges.num_classes() != fields.num_classes()
            || edges.width() != fields.width()
            || edges.height() != fields.height()
        {
            return Err(AlignmentError::Mismatch(
                "edge sets and distance fields disagree in shape".into(),
            ));
        }
        check_confusion(cfg, edges.num_classes())?;
        Ok(Self {
            edges,
            fields,
            cfg,
            forward_rows: cfg.confusion.as_ref().map(WeightRows::forward),
            reverse_rows: cfg
                .confusion
                .as_ref()
                .map(|c| WeightRows::reverse(c, cfg.reverse_weighting)),
        })
    }

    pub fn config(&self) -> &LossConfig {
        self.cfg
    }

    pub fn edges(&self) -> &ClassEdgeSets {
        self.edges
    }

    pub fn forward(&self, entries: &[ProjectedPoint]) -> Result<f64, AlignmentError> {
        forward_term(entries, self.fields, self.forward_rows.as_ref(), self.cfg.delta)
    }

    /// Reverse term using a prepared index over the projected points.
    pub fn reverse_indexed(&self, index: &ProjectionIndex) -> Result<f64, AlignmentError> {
        reverse_term(self.edges, index, self.reverse_rows.as_ref(), self.cfg.delta)
    }

    pub fn build_index(&self, entries: &[ProjectedPoint], index: &mut ProjectionIndex) {
        index.build(
            entries,
            self.edges.width(),
            self.edges.height(),
            self.edges.num_classes(),
            self.cfg.d_max,
        );
    }

    /// `λ_f · L_f + λ_r · L_r`; terms with zero weight are skipped.
    pub fn evaluate(
        &self,
        entries: &[ProjectedPoint],
        index: &mut ProjectionIndex,
    ) -> Result<LossBreakdown, AlignmentError> {
        check_classes(entries, self.fields.num_classes())?;
        let forward = if self.cfg.lambda_f > 0.0 {
            Some(self.forward(entries)?)
        } else {
            None
        };
        let reverse = if self.cfg.lambda_r > 0.0 {
            self.build_index(entries, index);
            Some(self.reverse_indexed(index)?)
        } else {
            None
        };
        let total = forward.map_or(0.0, |f| self.cfg.lambda_f * f)
            + reverse.map_or(0.0, |r| self.cfg.lambda_r * r);
        Ok(LossBreakdown {
            forward,
            reverse,
            total,
        })
    }
}

fn forward_term(
    entries: &[ProjectedPoint],
    fields: &DistanceFieldStack,
    rows: Option<&WeightRows>,
    delta: f64,
) -> Result<f64, AlignmentError> {
    if entries.is_empty() {
        return Err(AlignmentError::NoEvidence("no projected map points"));
    }
    let sum: f64 = match rows {
        None => entries
            .iter()
            .map(|e| huber(fields.sample(e.class as usize, e.u, e.v), delta))
            .sum(),
        Some(rows) => entries
            .iter()
            .map(|e| {
                let mut acc = 0.0;
                for &(k, w) in &rows.0[e.class as usize] {
                    acc += w * huber(fields.sample(k, e.u, e.v), delta);
                }
                acc
            })
            .sum(),
    };
    Ok(sum / entries.len() as f64)
}

fn reverse_term(
    edges: &ClassEdgeSets,
    index: &ProjectionIndex,
    rows: Option<&WeightRows>,
    delta: f64,
) -> Result<f64, AlignmentError> {
    let total = edges.total();
    if total == 0 {
        return Err(AlignmentError::NoEvidence("no observed edge pixels"));
    }
    let mut sum = 0.0;
    for (j, set) in edges.sets().iter().enumerate() {
        match rows {
            None => {
                for &[x, y] in set {
                    sum += huber(index.nearest_clamped(j, x as f64, y as f64), delta);
                }
            }
            Some(rows) => {
                let row = &rows.0[j];
                for &[x, y] in set {
                    let mut acc = 0.0;
                    for &(k, w) in row {
                        acc += w * huber(index.nearest_clamped(k, x as f64, y as f64), delta);
                    }
                    sum += acc;
                }
            }
        }
    }
    Ok(sum / total as f64)
}

fn check_classes(entries: &[ProjectedPoint], k: usize) -> Result<(), AlignmentError> {
    match entries.iter().find(|e| e.class as usize >= k) {
        Some(e) => Err(AlignmentError::Mismatch(format!(
            "projected class {} outside [0, {k})",
            e.class
        ))),
        None => Ok(()),
    }
}

fn check_confusion(cfg: &LossConfig, k: usize) -> Result<(), AlignmentError> {
    match &cfg.confusion {
        Some(c) if c.num_classes() != k => Err(AlignmentError::Mismatch(format!(
            "confusion matrix is {0}x{0} but the mask has {k} classes",
            c.num_classes()
        ))),
        _ => Ok(()),
    }
}

/// Mean Huber penalty of projected points against same-class (or
/// confusion-weighted) edge distance fields.
pub fn forward_loss(
    proj: &ProjectedSemanticPoints,
    fields: &DistanceFieldStack,
    cfg: &LossConfig,
) -> Result<f64, AlignmentError> {
    cfg.validate()?;
    check_confusion(cfg, fields.num_classes())?;
    check_classes(&proj.entries, fields.num_classes())?;
    let rows = cfg.confusion.as_ref().map(WeightRows::forward);
    forward_term(&proj.entries, fields, rows.as_ref(), cfg.delta)
}

/// Mean Huber penalty of observed edge pixels against the nearest projected
/// point of the matching (or confusion-weighted) class.
pub fn reverse_loss(
    edges: &ClassEdgeSets,
    proj: &ProjectedSemanticPoints,
    cfg: &LossConfig,
) -> Result<f64, AlignmentError> {
    cfg.validate()?;
    check_confusion(cfg, edges.num_classes())?;
    check_classes(&proj.entries, edges.num_classes())?;
    let rows = cfg
        .confusion
        .as_ref()
        .map(|c| WeightRows::reverse(c, cfg.reverse_weighting));
    let mut index = ProjectionIndex::default();
    index.build(
        &proj.entries,
        edges.width(),
        edges.height(),
        edges.num_classes(),
        cfg.d_max,
    );
    reverse_term(edges, &index, rows.as_ref(), cfg.delta)
}

/// Symmetric semantic Chamfer objective `λ_f · L_f + λ_r · L_r`.
pub fn total_loss(
    proj: &ProjectedSemanticPoints,
    edges: &ClassEdgeSets,
    fields: &DistanceFieldStack,
    cfg: &LossConfig,
) -> Result<f64, AlignmentError> {
    let obs = Observation::new(edges, fields, cfg)?;
    let mut index = ProjectionIndex::default();
    Ok(obs.evaluate(&proj.entries, &mut index)?.total)
}
