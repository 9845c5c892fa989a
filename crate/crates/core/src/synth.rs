//! Synthetic labelled worlds, ideal segmentation renders and label
//! corruption. Serves as ground truth for the localization pipeline.

use crate::classes::{SemanticClass, DEFAULT_NUM_CLASSES, IGNORE};
use crate::cloud::{ColoredPoint, ColoredPointCloud, Datum, SemanticPoint, SemanticPointCloud};
use crate::crossmodal::ConfusionMatrix;
use crate::geometry::{render_labeled_points, CameraIntrinsics, PlanarTranslation, ViewGeometry};
use crate::mask::SegmentationMask;
use crate::semantic_map::LabeledView;
use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("invalid corruption: {0}")]
    Corruption(String),
}

/// Scene generator parameters. Ranges are `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    /// Side of the square world centred on the origin (m).
    pub extent: f64,
    /// Ground point density (points/m²).
    pub density: f64,
    pub num_classes: usize,
    pub ground_class: u8,
    pub buildings: usize,
    /// When set, buildings are added until this fraction of the ground is
    /// covered (overrides `buildings`).
    pub building_coverage: Option<f64>,
    pub building_size: [f64; 2],
    pub building_height: [f64; 2],
    pub strips: usize,
    pub strip_width: [f64; 2],
    pub strip_length: [f64; 2],
    pub discs: usize,
    pub disc_radius: [f64; 2],
    /// Box and strip sides snap to `(i + 1/2) * snap` and ground labels
    /// are decided once per `snap`-sized cell (0 disables both).
    pub snap: f64,
    pub walls: bool,
    /// Camera altitude above the datum for sampled frames (m).
    pub altitude: [f64; 2],
    /// Camera yaw for sampled frames (rad).
    pub yaw: [f64; 2],
    /// Rotation range of buildings and strips (rad). Non-zero angles
    /// disable side snapping; labels stay per snap cell.
    pub orientation: [f64; 2],
    pub image_width: usize,
    pub image_height: usize,
    pub focal: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            extent: 200.0,
            density: 16.0,
            num_classes: DEFAULT_NUM_CLASSES,
            ground_class: SemanticClass::PerviousSurface.id(),
            buildings: 20,
            building_coverage: None,
            building_size: [8.0, 24.0],
            building_height: [4.0, 15.0],
            strips: 6,
            strip_width: [4.0, 8.0],
            strip_length: [40.0, 150.0],
            discs: 12,
            disc_radius: [3.0, 9.0],
            snap: 0.5,
            walls: true,
            altitude: [100.0, 100.0],
            yaw: [0.0, 0.0],
            orientation: [0.0, 0.0],
            image_width: 256,
            image_height: 256,
            focal: 200.0,
        }
    }
}

fn check_range(name: &str, r: [f64; 2], min: f64) -> Result<(), SynthError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] >= min && r[1] >= r[0]) {
        return Err(SynthError::Scene(format!("{name} must satisfy {min} <= min <= max, got {r:?}")));
    }
    Ok(())
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Scene(m));
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return bad(format!("extent must be positive, got {}", self.extent));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return bad(format!("density must be positive, got {}", self.density));
        }
        if self.num_classes < DEFAULT_NUM_CLASSES {
            return bad(format!("need at least {DEFAULT_NUM_CLASSES} classes"));
        }
        if self.ground_class as usize >= self.num_classes {
            return bad(format!("ground class {} out of range", self.ground_class));
        }
        if let Some(c) = self.building_coverage {
            if !(0.0..0.95).contains(&c) {
                return bad(format!("building coverage must be in [0, 0.95), got {c}"));
            }
        }
        check_range("building_size", self.building_size, 0.0)?;
        check_range("building_height", self.building_height, 0.0)?;
        check_range("strip_width", self.strip_width, 0.0)?;
        check_range("strip_length", self.strip_length, 0.0)?;
        check_range("disc_radius", self.disc_radius, 0.0)?;
        check_range("altitude", self.altitude, 0.0)?;
        check_range("yaw", self.yaw, f64::NEG_INFINITY)?;
        check_range("orientation", self.orientation, f64::NEG_INFINITY)?;
        if self.altitude[0] <= self.building_height[1] {
            return bad("cameras must fly above the tallest building".into());
        }
        if !(self.snap >= 0.0 && self.snap.is_finite()) {
            return bad("snap must be non-negative".into());
        }
        self.intrinsics()
            .map_err(|e| SynthError::Scene(format!("camera: {e}")))?;
        Ok(())
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics, crate::geometry::GeometryError> {
        CameraIntrinsics::pinhole(self.focal, self.image_width, self.image_height)
    }

    /// Ground lattice spacing implied by the density (m).
    pub fn spacing(&self) -> f64 {
        1.0 / self.density.sqrt()
    }
}

/// Cheap rejection before rotating: `(dx, dy)` lies clearly outside the
/// circumcircle of a rectangle with half-sides `h0`, `h1`.
#[inline]
fn outside_circle(dx: f64, dy: f64, h0: f64, h1: f64) -> bool {
    let r2 = h0 * h0 + h1 * h1;
    dx * dx + dy * dy > r2 * (1.0 + 1e-9) + 1e-9
}

/// Flat-roofed rectangular building, rotated by `angle` about its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildingBox {
    pub center: [f64; 2],
    /// Side lengths along the rotated x and y axes (m).
    pub size: [f64; 2],
    pub angle: f64,
    pub height: f64,
}

impl BuildingBox {
    /// Box-local coordinates of a world point.
    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    fn world(&self, a: f64, b: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (self.center[0] + c * a - s * b, self.center[1] + s * a + c * b)
    }

    /// Half-open in the box frame, so abutting boxes never share a cell.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (hw, hd) = (self.size[0] / 2.0, self.size[1] / 2.0);
        if outside_circle(x - self.center[0], y - self.center[1], hw, hd) {
            return false;
        }
        let (a, b) = self.local(x, y);
        a >= -hw && a < hw && b >= -hd && b < hd
    }
}

/// Rectangle of width `width` along a direction, centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    pub center: [f64; 2],
    pub angle: f64,
    pub length: f64,
    pub width: f64,
}

impl Strip {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        if outside_circle(dx, dy, self.length / 2.0, self.width / 2.0) {
            return false;
        }
        let (s, c) = self.angle.sin_cos();
        let along = c * dx + s * dy;
        let across = -s * dx + c * dy;
        along.abs() < self.length / 2.0 && across.abs() < self.width / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
    pub class: u8,
}

impl Disc {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.center[0]).powi(2) + (y - self.center[1]).powi(2) < self.radius * self.radius
    }
}

/// Generated primitives and the labelled cloud sampled from them.
#[derive(Debug, Clone)]
pub struct Scene {
    pub spec: SceneSpec,
    pub buildings: Vec<BuildingBox>,
    pub strips: Vec<Strip>,
    pub discs: Vec<Disc>,
    pub cloud: SemanticPointCloud,
}

impl Scene {
    /// Ground label at `(x, y)` by priority buildings > strips > discs.
    pub fn label_at(&self, x: f64, y: f64) -> (u8, f64) {
        if let Some(b) = self.buildings.iter().find(|b| b.contains(x, y)) {
            return (SemanticClass::Building.id(), b.height);
        }
        if self.strips.iter().any(|s| s.contains(x, y)) {
            return (SemanticClass::ImperviousSurface.id(), 0.0);
        }
        if let Some(d) = self.discs.iter().find(|d| d.contains(x, y)) {
            return (d.class, 0.0);
        }
        (self.spec.ground_class, 0.0)
    }
}

/// Centre of the `snap`-sized cell containing `v` (cells centred on
/// multiples of `snap`).
pub fn cell_center(v: f64, snap: f64) -> f64 {
    if snap > 0.0 {
        (v / snap).round() * snap
    } else {
        v
    }
}

fn snap_to(v: f64, snap: f64) -> f64 {
    if snap > 0.0 {
        ((v / snap - 0.5).round() + 0.5) * snap
    } else {
        v
    }
}

/// Lattice centres along one axis of the world.
fn axis(extent: f64, spacing: f64) -> impl Iterator<Item = f64> + Clone {
    let n = (extent / spacing).floor() as i64;
    let half = n as f64 * spacing / 2.0;
    (0..n).map(move |i| -half + (i as f64 + 0.5) * spacing)
}

fn random_angle(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..=range[1])
    } else {
        range[0]
    }
}

fn random_box(rng: &mut ChaCha8Rng, spec: &SceneSpec) -> BuildingBox {
    let h = spec.extent / 2.0;
    let (w, d) = (
        rng.random_range(spec.building_size[0]..=spec.building_size[1]),
        rng.random_range(spec.building_size[0]..=spec.building_size[1]),
    );
    let (cx, cy) = (rng.random_range(-h..h), rng.random_range(-h..h));
    let angle = random_angle(rng, spec.orientation);
    let height = rng.random_range(spec.building_height[0]..=spec.building_height[1]);
    if angle != 0.0 {
        return BuildingBox { center: [cx, cy], size: [w, d], angle, height };
    }
    let min = [snap_to(cx - w / 2.0, spec.snap), snap_to(cy - d / 2.0, spec.snap)];
    let max = [
        snap_to(cx + w / 2.0, spec.snap).max(min[0] + spec.snap.max(1e-3)),
        snap_to(cy + d / 2.0, spec.snap).max(min[1] + spec.snap.max(1e-3)),
    ];
    BuildingBox {
        center: [(min[0] + max[0]) / 2.0, (min[1] + max[1]) / 2.0],
        size: [max[0] - min[0], max[1] - min[1]],
        angle: 0.0,
        height,
    }
}

/// Deterministic scene generation from `spec.seed`.
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ps = spec.spacing();
    let half = spec.extent / 2.0;

    let mut buildings = Vec::new();
    if let Some(target) = spec.building_coverage {
        // Coverage raster over the ground lattice.
        let xs: Vec<f64> = axis(spec.extent, ps).collect();
        let n = xs.len();
        let mut covered = vec![false; n * n];
        let mut count = 0usize;
        let mut guard = 0;
        while (count as f64) < target * (n * n) as f64 && guard < 100_000 {
            guard += 1;
            let b = random_box(&mut rng, spec);
            for (j, &y) in xs.iter().enumerate() {
                for (i, &x) in xs.iter().enumerate() {
                    if !covered[j * n + i] && b.contains(x, y) {
                        covered[j * n + i] = true;
                        count += 1;
                    }
                }
            }
            buildings.push(b);
        }
    } else {
        for _ in 0..spec.buildings {
            buildings.push(random_box(&mut rng, spec));
        }
    }

    let strips = (0..spec.strips)
        .map(|_| {
            let vertical = rng.random_bool(0.5);
            let width = rng.random_range(spec.strip_width[0]..=spec.strip_width[1]);
            let length = rng.random_range(spec.strip_length[0]..=spec.strip_length[1]);
            let c = [rng.random_range(-half..half), rng.random_range(-half..half)];
            // Snap the long sides onto the lattice.
            let (lo, hi) = if vertical {
                (snap_to(c[0] - width / 2.0, spec.snap), snap_to(c[0] + width / 2.0, spec.snap))
            } else {
                (snap_to(c[1] - width / 2.0, spec.snap), snap_to(c[1] + width / 2.0, spec.snap))
            };
            let width = (hi - lo).max(spec.snap);
            let mid = (lo + hi) / 2.0;
            let base = if vertical { std::f64::consts::FRAC_PI_2 } else { 0.0 };
            let turn = random_angle(&mut rng, spec.orientation);
            Strip {
                center: if vertical { [mid, c[1]] } else { [c[0], mid] },
                angle: base + turn,
                length,
                width,
            }
        })
        .collect();

    let disc_classes = [
        SemanticClass::Water.id(),
        SemanticClass::TreeVegetation.id(),
        SemanticClass::LowVegetation.id(),
    ];
    let discs = (0..spec.discs)
        .map(|_| {
            let mut class = disc_classes[rng.random_range(0..disc_classes.len())];
            if class == spec.ground_class {
                class = disc_classes[(disc_classes.iter().position(|&c| c == class).unwrap() + 1) % 3];
            }
            Disc {
                center: [rng.random_range(-half..half), rng.random_range(-half..half)],
                radius: rng.random_range(spec.disc_radius[0]..=spec.disc_radius[1]),
                class,
            }
        })
        .collect();

    let mut scene = Scene {
        spec: spec.clone(),
        buildings,
        strips,
        discs,
        cloud: SemanticPointCloud::new(Vec::new(), spec.num_classes, Datum::default()),
    };

    let jitter = 0.2 * ps;
    let mut points = Vec::new();
    let xs: Vec<f64> = axis(spec.extent, ps).collect();
    for &y in &xs {
        for &x in &xs {
            let (px, py) = (x + rng.random_range(-jitter..=jitter), y + rng.random_range(-jitter..=jitter));
            // Labels are decided per snap cell so every voxel of that size
            // is single-class.
            let (class, z) = scene.label_at(cell_center(x, spec.snap), cell_center(y, spec.snap));
            points.push(SemanticPoint {
                position: Point3::new(px, py, z),
                class,
                support: 1,
            });
        }
    }
    if spec.walls {
        let inset = 0.05 * ps;
        for b in &scene.buildings {
            let levels = (b.height / ps).floor() as usize;
            let mut wall = |x: f64, y: f64| {
                for l in 0..levels {
                    let z = (l as f64 + 0.5) * ps;
                    points.push(SemanticPoint {
                        position: Point3::new(x, y, z),
                        class: SemanticClass::Building.id(),
                        support: 1,
                    });
                }
            };
            let (hw, hd) = (b.size[0] / 2.0, b.size[1] / 2.0);
            let nx = (b.size[0] / ps).round().max(1.0) as usize;
            let ny = (b.size[1] / ps).round().max(1.0) as usize;
            for i in 0..nx {
                let a = -hw + (i as f64 + 0.5) * b.size[0] / nx as f64;
                for side in [-hd + inset, hd - inset] {
                    let (x, y) = b.world(a, side);
                    wall(x, y);
                }
            }
            for j in 0..ny {
                let e = -hd + (j as f64 + 0.5) * b.size[1] / ny as f64;
                for side in [-hw + inset, hw - inset] {
                    let (x, y) = b.world(side, e);
                    wall(x, y);
                }
            }
        }
    }
    // Keep only points inside the world square.
    points.retain(|p| p.position.x.abs() <= half && p.position.y.abs() <= half);
    scene.cloud = SemanticPointCloud::new(points, spec.num_classes, Datum::default());
    Ok(scene)
}

pub fn generate_world(spec: &SceneSpec) -> Result<SemanticPointCloud, SynthError> {
    Ok(generate_scene(spec)?.cloud)
}

/// Colour every point by its class, as a stand-in for a photogrammetric
/// reconstruction.
pub fn colorize(world: &SemanticPointCloud) -> ColoredPointCloud {
    ColoredPointCloud {
        points: world
            .points
            .iter()
            .map(|p| ColoredPoint {
                position: p.position,
                color: SemanticClass::from_id(p.class).map_or([255, 255, 255], |c| c.color()),
            })
            .collect(),
        datum: world.datum,
    }
}

/// Ideal segmentation: z-buffered splat of the labelled cloud with holes
/// filled from the nearest-depth labelled pixel within 2 px.
pub fn render_truth_mask(map: &SemanticPointCloud, view: &ViewGeometry, t: PlanarTranslation) -> SegmentationMask {
    const FILL_RADIUS: i64 = 2;
    let k = &view.intrinsics;
    let (w, h) = (k.width, k.height);
    let mut label = vec![IGNORE; w * h];
    let mut depth = vec![f64::INFINITY; w * h];
    for e in render_labeled_points(map, view, t).entries {
        let (x, y) = e.pixel();
        label[y * w + x] = e.class;
        depth[y * w + x] = e.depth;
    }
    let mut out = label.clone();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if label[(y * w as i64 + x) as usize] != IGNORE {
                continue;
            }
            let mut best: Option<(f64, i64, usize)> = None;
            for dy in -FILL_RADIUS..=FILL_RADIUS {
                for dx in -FILL_RADIUS..=FILL_RADIUS {
                    let d2 = dx * dx + dy * dy;
                    let (nx, ny) = (x + dx, y + dy);
                    if d2 > FILL_RADIUS * FILL_RADIUS || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let i = (ny * w as i64 + nx) as usize;
                    if label[i] == IGNORE {
                        continue;
                    }
                    let key = (depth[i], d2, i);
                    let better = match best {
                        None => true,
                        Some(b) => key.0.total_cmp(&b.0).then(key.1.cmp(&b.1)).then(key.2.cmp(&b.2)).is_lt(),
                    };
                    if better {
                        best = Some(key);
                    }
                }
            }
            if let Some((_, _, i)) = best {
                out[(y * w as i64 + x) as usize] = label[i];
            }
        }
    }
    SegmentationMask::new(w, h, map.num_classes, out).expect("labels come from the map")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSpec {
    /// Probability that a block of pixels is relabelled.
    pub flip_rate: f64,
    /// Relabelling distribution per true class; `None` picks uniformly
    /// among the other classes.
    pub confusion: Option<ConfusionMatrix>,
    /// Side of the square pixel blocks that flip together.
    pub flip_block: usize,
    /// Peak boundary displacement (px).
    pub boundary_jitter: f64,
    /// Probability that each class is erased to ignore.
    pub dropout: f64,
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        Self {
            flip_rate: 0.0,
            confusion: None,
            flip_block: 1,
            boundary_jitter: 0.0,
            dropout: 0.0,
        }
    }
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Corruption(m));
        for (name, p) in [("flip_rate", self.flip_rate), ("dropout", self.dropout)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.flip_block == 0 {
            return bad("flip_block must be at least 1".into());
        }
        if !(self.boundary_jitter >= 0.0 && self.boundary_jitter.is_finite()) {
            return bad("boundary_jitter must be non-negative".into());
        }
        Ok(())
    }

    pub fn is_noop(&self) -> bool {
        self.flip_rate == 0.0 && self.boundary_jitter == 0.0 && self.dropout == 0.0
    }
}

/// Jitter boundaries, flip labels and drop classes, in that order.
/// Deterministic in `seed`; ignore pixels are never relabelled.
pub fn corrupt_mask(mask: &SegmentationMask, spec: &CorruptionSpec, seed: u64) -> Result<SegmentationMask, SynthError> {
    spec.validate()?;
    let k = mask.num_classes();
    if let Some(c) = &spec.confusion {
        if c.num_classes() != k {
            return Err(SynthError::Corruption(format!(
                "confusion is {}x{0} but the mask has {k} classes",
                c.num_classes()
            )));
        }
    }
    if spec.is_noop() {
        return Ok(mask.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (mask.width(), mask.height());
    let mut labels = mask.labels().to_vec();

    if spec.boundary_jitter > 0.0 {
        // Smooth displacement field: a sum of three plane waves per axis.
        let waves: Vec<[f64; 4]> = (0..6)
            .map(|_| {
                let wavelength = rng.random_range(16.0..64.0);
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let om = std::f64::consts::TAU / wavelength;
                [om * theta.cos(), om * theta.sin(), phase, 0.0]
            })
            .collect();
        let amp = spec.boundary_jitter / 3.0;
        let field = |x: f64, y: f64, which: usize| -> f64 {
            waves[which * 3..which * 3 + 3]
                .iter()
                .map(|w| amp * (w[0] * x + w[1] * y + w[2]).sin())
                .sum()
        };
        let src = labels.clone();
        for y in 0..h {
            for x in 0..w {
                let (fx, fy) = (x as f64, y as f64);
                let sx = (fx + field(fx, fy, 0)).round().clamp(0.0, (w - 1) as f64) as usize;
                let sy = (fy + field(fx, fy, 1)).round().clamp(0.0, (h - 1) as f64) as usize;
                labels[y * w + x] = src[sy * w + sx];
            }
        }
    }

    if spec.flip_rate > 0.0 {
        let b = spec.flip_block;
        let (bw, bh) = (w.div_ceil(b), h.div_ceil(b));
        for by in 0..bh {
            for bx in 0..bw {
                // Draw both numbers unconditionally to keep the stream aligned.
                let flip = rng.random::<f64>() < spec.flip_rate;
                let u: f64 = rng.random();
                if !flip {
                    continue;
                }
                for y in by * b..((by + 1) * b).min(h) {
                    for x in bx * b..((bx + 1) * b).min(w) {
                        let l = labels[y * w + x];
                        if l == IGNORE {
                            continue;
                        }
                        labels[y * w + x] = match &spec.confusion {
                            Some(c) => sample_row(c.row(l as usize), u),
                            None if k > 1 => {
                                let j = ((u * (k - 1) as f64) as usize).min(k - 2);
                                if j >= l as usize { j as u8 + 1 } else { j as u8 }
                            }
                            None => l,
                        };
                    }
                }
            }
        }
    }

    if spec.dropout > 0.0 {
        let dropped: Vec<bool> = (0..k).map(|_| rng.random::<f64>() < spec.dropout).collect();
        for l in labels.iter_mut() {
            if *l != IGNORE && dropped[*l as usize] {
                *l = IGNORE;
            }
        }
    }
    Ok(SegmentationMask::new(w, h, k, labels).expect("labels stay in range"))
}

/// Inverse-CDF draw from a probability row.
fn sample_row(row: &[f64], u: f64) -> u8 {
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j as u8;
        }
    }
    // Rounding left `u` beyond the last cumulative value.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u8
}

/// One observation with known offset from its navigation prior.
#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub id: String,
    /// Camera model at the prior position.
    pub view: ViewGeometry,
    pub t_true: PlanarTranslation,
    pub truth: SegmentationMask,
}

/// Camera footprint half-diagonal on the ground at the highest altitude (m).
pub fn footprint_radius(spec: &SceneSpec) -> f64 {
    let (w, h) = (spec.image_width as f64, spec.image_height as f64);
    0.5 * w.hypot(h) * spec.altitude[1] / spec.focal
}

/// Nadir view at `prior` with altitude and yaw drawn from the scene ranges.
pub fn random_view(spec: &SceneSpec, rng: &mut impl Rng, prior: PlanarTranslation) -> ViewGeometry {
    let intr = spec.intrinsics().expect("validated spec");
    let alt = if spec.altitude[1] > spec.altitude[0] {
        rng.random_range(spec.altitude[0]..=spec.altitude[1])
    } else {
        spec.altitude[0]
    };
    let yaw = if spec.yaw[1] > spec.yaw[0] {
        rng.random_range(spec.yaw[0]..=spec.yaw[1])
    } else {
        spec.yaw[0]
    };
    ViewGeometry::nadir(intr, alt, prior, yaw).expect("nadir views are valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSampling {
    pub count: usize,
    /// True offsets are drawn from `[-offset, offset]²` (m).
    pub offset: f64,
    /// Priors are rounded to multiples of this step (0 keeps them
    /// continuous).
    pub prior_step: f64,
    /// Offsets are rounded to multiples of this step (0 keeps them
    /// continuous).
    pub offset_step: f64,
    pub seed: u64,
}

impl Default for FrameSampling {
    fn default() -> Self {
        Self {
            count: 10,
            offset: 30.0,
            prior_step: 0.0,
            offset_step: 0.0,
            seed: 0,
        }
    }
}

fn round_to(v: f64, step: f64) -> f64 {
    if step > 0.0 {
        (v / step).round() * step
    } else {
        v
    }
}

/// Sample frames whose true offset from the prior lies in
/// `[-offset, offset]²` and whose camera footprint stays inside the world.
pub fn sample_frames(scene: &Scene, sampling: &FrameSampling) -> Vec<SyntheticFrame> {
    let spec = &scene.spec;
    let offset = sampling.offset;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let margin = offset + footprint_radius(spec);
    let room = (spec.extent / 2.0 - margin).max(0.0);
    (0..sampling.count)
        .map(|i| {
            let mut coord = |r: f64, step: f64| {
                let v = round_to(rng.random_range(-r..=r), step);
                if v.abs() > r { v - v.signum() * step } else { v }
            };
            let prior = PlanarTranslation::new(coord(room, sampling.prior_step), coord(room, sampling.prior_step));
            let t_true = PlanarTranslation::new(coord(offset, sampling.offset_step), coord(offset, sampling.offset_step));
            let view = random_view(spec, &mut rng, prior);
            let truth = render_truth_mask(&scene.cloud, &view, t_true);
            SyntheticFrame {
                id: format!("frame_{i:05}"),
                view,
                t_true,
                truth,
            }
        })
        .collect()
}

/// Nadir survey views on a regular grid with their truth masks, for
/// exercising map construction.
pub fn mapping_views(scene: &Scene, spacing: f64) -> Vec<LabeledView> {
    let spec = &scene.spec;
    let intr = spec.intrinsics().expect("validated spec");
    axis(spec.extent, spacing)
        .flat_map(|y| axis(spec.extent, spacing).map(move |x| (x, y)))
        .map(|(x, y)| {
            let view = ViewGeometry::nadir(intr, spec.altitude[0], PlanarTranslation::new(x, y), 0.0)
                .expect("nadir views are valid");
            let mask = render_truth_mask(&scene.cloud, &view, PlanarTranslation::ZERO);
            LabeledView::at(mask, view, PlanarTranslation::ZERO).expect("mask matches camera")
        })
        .collect()
}
