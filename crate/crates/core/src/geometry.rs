//! Camera model, rigid transforms and z-buffered projection of labelled points.
//!
//! Frames: the world is right-handed ENU (x east, y north, z up) relative to
//! the map datum. Cameras use x right, y down, z forward.
//!
//! Camera placement for a candidate planar translation `t`:
//!
//! ```text
//! body origin   b(t) = (prior.x + t.x, prior.y + t.y, height)
//! camera centre c(t) = b(t) + R_wb * t_cb
//! R_wc               = R_wb * R_cb
//! x_cam              = R_wc^T * (x_world - c(t))
//! ```
//!
//! where `(R_cb, t_cb)` maps camera coordinates into the body frame.

use crate::cloud::SemanticPointCloud;
use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid intrinsics: {0}")]
    Intrinsics(String),
    #[error("matrix is not a proper rotation (orthonormality error {orth:.3e}, det {det})")]
    NotRotation { orth: f64, det: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Brown–Conrady polynomial lens distortion on normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Distortion {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Distortion {
    pub fn is_zero(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0 && self.k3 == 0.0 && self.p1 == 0.0 && self.p2 == 0.0
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        if self.is_zero() {
            return (x, y);
        }
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3));
        let xd = x * radial + 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x);
        let yd = y * radial + self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y;
        (xd, yd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub dist: Distortion,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        dist: Distortion,
    ) -> Result<Self, GeometryError> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            dist,
        };
        k.validate()?;
        Ok(k)
    }

    /// Undistorted camera with the principal point at the image centre.
    pub fn pinhole(focal: f64, width: usize, height: usize) -> Result<Self, GeometryError> {
        Self::new(
            focal,
            focal,
            (width as f64 - 1.0) / 2.0,
            (height as f64 - 1.0) / 2.0,
            width,
            height,
            Distortion::default(),
        )
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::Intrinsics(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("image size must be positive");
        }
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return bad("focal lengths must be positive and finite");
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return bad("cx must lie in [0, width)");
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return bad("cy must lie in [0, height)");
        }
        let d = self.dist;
        if ![d.k1, d.k2, d.k3, d.p1, d.p2].iter().all(|v| v.is_finite()) {
            return bad("distortion coefficients must be finite");
        }
        Ok(())
    }
}

/// Checks `m` is orthonormal with determinant +1 to within 1e-9.
pub fn check_rotation(m: &Matrix3<f64>) -> Result<(), GeometryError> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(GeometryError::NonFinite("rotation"));
    }
    let orth = (m.transpose() * m - Matrix3::identity()).abs().max();
    let det = m.determinant();
    if orth > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
        return Err(GeometryError::NotRotation { orth, det });
    }
    Ok(())
}

/// Rigid transform `x -> R x + t`. The role (world→camera, camera→body, …)
/// is fixed by the owning field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidPose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        check_rotation(&rotation)?;
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite("translation"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    #[inline]
    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// World→camera pose for a camera at `center` with orientation `r_wc`.
    pub fn world_to_camera_from_center(
        r_wc: Matrix3<f64>,
        center: Point3<f64>,
    ) -> Result<Self, GeometryError> {
        let r_cw = r_wc.transpose();
        Self::new(r_cw, -(r_cw * center.coords))
    }
}

/// Horizontal offset from the navigation prior (m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarTranslation {
    pub tx: f64,
    pub ty: f64,
}

impl PlanarTranslation {
    pub const ZERO: PlanarTranslation = PlanarTranslation { tx: 0.0, ty: 0.0 };

    pub fn new(tx: f64, ty: f64) -> Self {
        Self { tx, ty }
    }

    pub fn norm(&self) -> f64 {
        self.tx.hypot(self.ty)
    }

    pub fn is_finite(&self) -> bool {
        self.tx.is_finite() && self.ty.is_finite()
    }
}

/// Everything about a frame's camera except the unknown planar translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewGeometry {
    /// Body-to-world rotation from onboard attitude estimation.
    pub attitude: Matrix3<f64>,
    /// Camera-to-body transform.
    pub cam_extrinsics: RigidPose,
    /// Height of the body origin above the map datum (m).
    pub height: f64,
    pub intrinsics: CameraIntrinsics,
    /// Navigation prior for the horizontal position; `t = 0` means the
    /// prior is correct.
    pub prior: PlanarTranslation,
}

impl ViewGeometry {
    pub fn new(
        attitude: Matrix3<f64>,
        cam_extrinsics: RigidPose,
        height: f64,
        intrinsics: CameraIntrinsics,
        prior: PlanarTranslation,
    ) -> Result<Self, GeometryError> {
        check_rotation(&attitude)?;
        if !height.is_finite() {
            return Err(GeometryError::NonFinite("height"));
        }
        if !prior.is_finite() {
            return Err(GeometryError::NonFinite("prior"));
        }
        intrinsics.validate()?;
        let v = Self {
            attitude,
            cam_extrinsics,
            height,
            intrinsics,
            prior,
        };
        check_rotation(&v.rotation_wc())?;
        Ok(v)
    }

    /// Downward-looking camera with image x axis at `yaw` radians from east.
    pub fn nadir(
        intrinsics: CameraIntrinsics,
        height: f64,
        prior: PlanarTranslation,
        yaw: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(
            nadir_rotation(yaw),
            RigidPose::identity(),
            height,
            intrinsics,
            prior,
        )
    }

    /// Camera-to-world rotation.
    pub fn rotation_wc(&self) -> Matrix3<f64> {
        self.attitude * self.cam_extrinsics.rotation
    }

    /// Camera centre in the world frame for candidate translation `t`.
    pub fn camera_center(&self, t: PlanarTranslation) -> Point3<f64> {
        let body = Vector3::new(self.prior.tx + t.tx, self.prior.ty + t.ty, self.height);
        Point3::from(body + self.attitude * self.cam_extrinsics.translation)
    }

    /// World→camera pose for candidate translation `t`.
    pub fn world_to_camera_pose(&self, t: PlanarTranslation) -> RigidPose {
        let r_cw = self.rotation_wc().transpose();
        let c = self.camera_center(t);
        RigidPose {
            rotation: r_cw,
            translation: -(r_cw * c.coords),
        }
    }
}

/// Camera-to-world rotation of a nadir camera (optical axis along −z).
pub fn nadir_rotation(yaw: f64) -> Matrix3<f64> {
    let (s, c) = yaw.sin_cos();
    Matrix3::new(c, s, 0.0, s, -c, 0.0, 0.0, 0.0, -1.0)
}

/// Express a world point in the camera frame for candidate translation `t`.
pub fn world_to_camera(
    point: &Point3<f64>,
    view: &ViewGeometry,
    t: PlanarTranslation,
) -> Point3<f64> {
    let r_wc = view.rotation_wc();
    let c = view.camera_center(t);
    Point3::from(r_wc.transpose() * (point - c))
}

/// Inverse of [`world_to_camera`].
pub fn camera_to_world(
    point: &Point3<f64>,
    view: &ViewGeometry,
    t: PlanarTranslation,
) -> Point3<f64> {
    view.camera_center(t) + view.rotation_wc() * point.coords
}

/// Pinhole projection with lens distortion. Returns `None` when the point is
/// behind the camera or lands outside `[0, width-1] x [0, height-1]`.
#[inline]
pub fn project_pixel(cam_point: &Point3<f64>, intr: &CameraIntrinsics) -> Option<[f64; 2]> {
    project_xyz(cam_point.x, cam_point.y, cam_point.z, intr)
}

#[inline]
fn project_xyz(x: f64, y: f64, z: f64, intr: &CameraIntrinsics) -> Option<[f64; 2]> {
    if z <= 0.0 {
        return None;
    }
    let (xd, yd) = intr.dist.apply(x / z, y / z);
    let u = intr.fx * xd + intr.cx;
    let v = intr.fy * yd + intr.cy;
    let in_view = u >= 0.0
        && u <= (intr.width - 1) as f64
        && v >= 0.0
        && v <= (intr.height - 1) as f64;
    in_view.then_some([u, v])
}

/// `(round(x), x - round(x))` for finite `x >= 0`, both exact.
#[inline]
fn round_nonneg(x: f64) -> (usize, f64) {
    let i = x as usize;
    let frac = x - i as f64;
    if frac >= 0.5 {
        (i + 1, frac - 1.0)
    } else {
        (i, frac)
    }
}

/// One map point after projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub u: f64,
    pub v: f64,
    pub class: u8,
    /// Camera-frame depth (m).
    pub depth: f64,
    /// Index of the originating point in its cloud.
    pub source: u32,
}

impl ProjectedPoint {
    /// Nearest pixel, rounding halves up. Projected coordinates are never
    /// negative, so this avoids the libm call behind `f64::round`.
    #[inline]
    pub fn pixel(&self) -> (usize, usize) {
        (round_nonneg(self.u).0, round_nonneg(self.v).0)
    }

    #[inline]
    fn center_dist2(&self) -> f64 {
        let du = round_nonneg(self.u).1;
        let dv = round_nonneg(self.v).1;
        du * du + dv * dv
    }

    /// Z-buffer priority: nearer first, then closer to the pixel centre,
    /// then lower source index.
    #[inline]
    pub fn occludes(&self, other: &ProjectedPoint) -> bool {
        (self.depth, self.center_dist2(), self.source)
            .partial_cmp(&(other.depth, other.center_dist2(), other.source))
            == Some(std::cmp::Ordering::Less)
    }
}

/// The pixel-unique set of visible labelled points for one candidate
/// translation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProjectedSemanticPoints {
    pub entries: Vec<ProjectedPoint>,
    pub translation: PlanarTranslation,
}

impl ProjectedSemanticPoints {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one class (the per-class subset used by the reverse term).
    pub fn of_class(&self, class: u8) -> impl Iterator<Item = &ProjectedPoint> {
        self.entries.iter().filter(move |e| e.class == class)
    }
}

/// Reusable depth buffer. Generation stamps avoid clearing between renders.
#[derive(Debug, Clone)]
pub struct ZBuffer {
    width: usize,
    stamp: Vec<u32>,
    slot: Vec<u32>,
    generation: u32,
}

impl ZBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            stamp: vec![0; width * height],
            slot: vec![0; width * height],
            generation: 0,
        }
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.width == width && self.stamp.len() == width * height
    }

    fn begin(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    /// Offer a projected point; keeps the occluding entry per pixel. Entries
    /// stay in order of first occupancy.
    #[inline]
    fn offer(&mut self, p: ProjectedPoint, out: &mut Vec<ProjectedPoint>) {
        let (px, py) = p.pixel();
        let key = py * self.width + px;
        if self.stamp[key] != self.generation {
            self.stamp[key] = self.generation;
            self.slot[key] = out.len() as u32;
            out.push(p);
        } else {
            let cur = &mut out[self.slot[key] as usize];
            if p.occludes(cur) {
                *cur = p;
            }
        }
    }
}

/// Project every map point for translation `t`, keeping only the nearest
/// point per pixel.
pub fn render_labeled_points(
    cloud: &SemanticPointCloud,
    view: &ViewGeometry,
    t: PlanarTranslation,
) -> ProjectedSemanticPoints {
    let pose = view.world_to_camera_pose(t);
    let intr = &view.intrinsics;
    let mut zbuf = ZBuffer::new(intr.width, intr.height);
    let mut entries = Vec::new();
    render_with_pose(
        cloud.points.iter().map(|p| (p.position, p.class)),
        &pose,
        intr,
        &mut zbuf,
        &mut entries,
    );
    ProjectedSemanticPoints {
        entries,
        translation: t,
    }
}

/// Z-buffered render of `(position, class)` items through an explicit
/// world→camera pose. `out` is cleared first.
pub fn render_with_pose<I>(
    points: I,
    pose: &RigidPose,
    intr: &CameraIntrinsics,
    zbuf: &mut ZBuffer,
    out: &mut Vec<ProjectedPoint>,
) where
    I: IntoIterator<Item = (Point3<f64>, u8)>,
{
    assert!(zbuf.fits(intr.width, intr.height), "z-buffer size mismatch");
    out.clear();
    zbuf.begin();
    for (i, (p, class)) in points.into_iter().enumerate() {
        let q = pose.apply(&p);
        if let Some([u, v]) = project_pixel(&q, intr) {
            zbuf.offer(
                ProjectedPoint {
                    u,
                    v,
                    class,
                    depth: q.z,
                    source: i as u32,
                },
                out,
            );
        }
    }
}

/// Map points pre-transformed into the camera frame of one view at `t = 0`.
///
/// Because only the planar translation varies, the camera-frame coordinates
/// for any `t` are `q0 - t.x * a - t.y * b` with `a`, `b` the world x/y axes
/// expressed in the camera frame. This reproduces [`world_to_camera`] up to
/// floating-point rounding.
#[derive(Debug, Clone)]
pub struct PreparedView {
    intr: CameraIntrinsics,
    cam: Vec<[f64; 3]>,
    class: Vec<u8>,
    axis_x: Vector3<f64>,
    axis_y: Vector3<f64>,
}

impl PreparedView {
    pub fn new(cloud: &SemanticPointCloud, view: &ViewGeometry) -> Self {
        let pose = view.world_to_camera_pose(PlanarTranslation::ZERO);
        let r_cw = *pose.rotation();
        let cam = cloud
            .points
            .iter()
            .map(|p| {
                let q = pose.apply(&p.position);
                [q.x, q.y, q.z]
            })
            .collect();
        Self {
            intr: view.intrinsics,
            cam,
            class: cloud.points.iter().map(|p| p.class).collect(),
            axis_x: r_cw.column(0).into_owned(),
            axis_y: r_cw.column(1).into_owned(),
        }
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intr
    }

    pub fn len(&self) -> usize {
        self.cam.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cam.is_empty()
    }

    /// Indices of points that can be in view for some translation inside
    /// the box `[x0, x1] x [y0, y1]`. Conservative: may keep points that are
    /// never visible, never drops a visible one. With lens distortion every
    /// point is kept.
    pub fn cull(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<u32> {
        if !self.intr.dist.is_zero() {
            return (0..self.cam.len() as u32).collect();
        }
        let k = &self.intr;
        let corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)];
        let (wmax, hmax) = ((k.width - 1) as f64, (k.height - 1) as f64);
        // Slack covers the rounding difference between the culling and
        // projection arithmetic.
        let slack = 1e-6;
        let mut keep = Vec::new();
        'points: for (i, q) in self.cam.iter().enumerate() {
            // Each visibility constraint is linear in t; it can hold
            // somewhere in the box only if it holds at some corner.
            let mut sat = [false; 5];
            for &(tx, ty) in &corners {
                let x = q[0] - tx * self.axis_x.x - ty * self.axis_y.x;
                let y = q[1] - tx * self.axis_x.y - ty * self.axis_y.y;
                let z = q[2] - tx * self.axis_x.z - ty * self.axis_y.z;
                let scale = 1.0 + z.abs();
                sat[0] |= z > -slack * scale;
                sat[1] |= k.fx * x + k.cx * z >= -slack * scale;
                sat[2] |= k.fx * x + (k.cx - wmax) * z <= slack * scale;
                sat[3] |= k.fy * y + k.cy * z >= -slack * scale;
                sat[4] |= k.fy * y + (k.cy - hmax) * z <= slack * scale;
            }
            for s in sat {
                if !s {
                    continue 'points;
                }
            }
            keep.push(i as u32);
        }
        keep
    }

    /// Z-buffered render for translation `t` over the given subset of point
    /// indices (ascending), or over all points.
    pub fn render_into(
        &self,
        t: PlanarTranslation,
        subset: Option<&[u32]>,
        zbuf: &mut ZBuffer,
        out: &mut Vec<ProjectedPoint>,
    ) {
        assert!(zbuf.fits(self.intr.width, self.intr.height), "z-buffer size mismatch");
        out.clear();
        zbuf.begin();
        let d = self.axis_x * t.tx + self.axis_y * t.ty;
        let mut visit = |i: usize| {
            let q = &self.cam[i];
            let (x, y, z) = (q[0] - d.x, q[1] - d.y, q[2] - d.z);
            if let Some([u, v]) = project_xyz(x, y, z, &self.intr) {
                zbuf.offer(
                    ProjectedPoint {
                        u,
                        v,
                        class: self.class[i],
                        depth: z,
                        source: i as u32,
                    },
                    out,
                );
            }
        };
        match subset {
            Some(idx) => idx.iter().for_each(|&i| visit(i as usize)),
            None => (0..self.cam.len()).for_each(visit),
        }
    }

    pub fn render(&self, t: PlanarTranslation) -> ProjectedSemanticPoints {
        let mut zbuf = ZBuffer::new(self.intr.width, self.intr.height);
        let mut entries = Vec::new();
        self.render_into(t, None, &mut zbuf, &mut entries);
        ProjectedSemanticPoints {
            entries,
            translation: t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{Datum, SemanticPoint};
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn intr(w: usize, h: usize) -> CameraIntrinsics {
        CameraIntrinsics::new(100.0, 100.0, 256.0, 200.0, w, h, Distortion::default()).unwrap()
    }

    fn identity_view(height: f64) -> ViewGeometry {
        ViewGeometry::new(
            Matrix3::identity(),
            RigidPose::identity(),
            height,
            intr(512, 400),
            PlanarTranslation::ZERO,
        )
        .unwrap()
    }

    fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let axis = Unit::new_normalize(axis + Vector3::new(1e-3, 0.0, 0.0));
        Rotation3::from_axis_angle(&axis, rng.random_range(-3.0..3.0)).into_inner()
    }

    #[test]
    fn identity_world_to_camera() {
        let v = identity_view(0.0);
        let p = world_to_camera(&Point3::origin(), &v, PlanarTranslation::ZERO);
        assert_eq!(p, Point3::origin());
    }

    #[test]
    fn camera_center_maps_to_origin() {
        let v = identity_view(10.0);
        let p = world_to_camera(
            &Point3::new(1.0, 2.0, 10.0),
            &v,
            PlanarTranslation::new(1.0, 2.0),
        );
        assert_eq!(p, Point3::origin());
    }

    #[test]
    fn round_trip_random_poses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let att = random_rotation(&mut rng);
            let ext = RigidPose::new(
                random_rotation(&mut rng),
                Vector3::new(rng.random_range(-1.0..1.0), 0.2, -0.1),
            )
            .unwrap();
            let view = ViewGeometry::new(
                att,
                ext,
                rng.random_range(20.0..200.0),
                intr(512, 400),
                PlanarTranslation::new(rng.random_range(-50.0..50.0), 3.0),
            )
            .unwrap();
            let t = PlanarTranslation::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
            let p = Point3::new(
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
                rng.random_range(-5.0..40.0),
            );
            let back = camera_to_world(&world_to_camera(&p, &view, t), &view, t);
            assert!((back - p).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_rotations() {
        let mut m = Matrix3::identity();
        m[(0, 0)] = -1.0;
        assert!(matches!(check_rotation(&m), Err(GeometryError::NotRotation { .. })));
        assert!(check_rotation(&nadir_rotation(0.7)).is_ok());
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 4, 4, Distortion::default()).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 0.0, 4, 4, Distortion::default()).is_err());
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let k = intr(512, 400);
        assert_eq!(project_pixel(&Point3::new(0.0, 0.0, 3.5), &k), Some([256.0, 200.0]));
    }

    #[test]
    fn pinhole_arithmetic() {
        let k = intr(512, 400);
        let [u, _] = project_pixel(&Point3::new(1.0, 0.0, 2.0), &k).unwrap();
        assert_eq!(u, 306.0);
        assert_eq!(project_pixel(&Point3::new(1.0, 0.0, -2.0), &k), None);
        assert_eq!(project_pixel(&Point3::new(100.0, 0.0, 2.0), &k), None);
    }

    /// Independent per-point evaluator of the radial-tangential model.
    fn distort_reference(x: f64, y: f64, d: &Distortion) -> (f64, f64) {
        let r2 = x.powi(2) + y.powi(2);
        let r4 = r2 * r2;
        let r6 = r4 * r2;
        let radial = 1.0 + d.k1 * r2 + d.k2 * r4 + d.k3 * r6;
        let dx = 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x.powi(2));
        let dy = d.p1 * (r2 + 2.0 * y.powi(2)) + 2.0 * d.p2 * x * y;
        (x * radial + dx, y * radial + dy)
    }

    #[test]
    fn distortion_matches_reference_on_grid() {
        let dist = Distortion {
            k1: -0.21,
            k2: 0.05,
            k3: -0.002,
            p1: 0.001,
            p2: -0.0007,
        };
        let k = CameraIntrinsics::new(400.0, 410.0, 255.5, 250.0, 512, 500, dist).unwrap();
        for i in -10..=10 {
            for j in -10..=10 {
                let p = Point3::new(i as f64 * 0.05, j as f64 * 0.05, 1.0);
                let (xd, yd) = distort_reference(p.x, p.y, &dist);
                let expected = [k.fx * xd + k.cx, k.fy * yd + k.cy];
                match project_pixel(&p, &k) {
                    Some(uv) => {
                        assert!((uv[0] - expected[0]).abs() < 1e-9);
                        assert!((uv[1] - expected[1]).abs() < 1e-9);
                    }
                    None => assert!(
                        expected[0] < 0.0 || expected[0] > 511.0 || expected[1] < 0.0 || expected[1] > 499.0
                    ),
                }
            }
        }
    }

    fn cloud_of(points: &[(f64, f64, f64, u8)]) -> SemanticPointCloud {
        SemanticPointCloud::new(
            points
                .iter()
                .map(|&(x, y, z, c)| SemanticPoint {
                    position: Point3::new(x, y, z),
                    class: c,
                    support: 1,
                })
                .collect(),
            8,
            Datum::default(),
        )
    }

    #[test]
    fn zbuffer_keeps_nearest_on_ray() {
        let v = identity_view(0.0);
        // Same ray through (0.2, 0.1, 1): depths 5 and 9.
        let cloud = cloud_of(&[(1.8, 0.9, 9.0, 2), (1.0, 0.5, 5.0, 1)]);
        let proj = render_labeled_points(&cloud, &v, PlanarTranslation::ZERO);
        assert_eq!(proj.len(), 1);
        assert_eq!(proj.entries[0].class, 1);
        assert!((proj.entries[0].depth - 5.0).abs() < 1e-12);
    }

    #[test]
    fn points_behind_camera_are_dropped() {
        let v = identity_view(0.0);
        let cloud = cloud_of(&[(0.0, 0.0, -1.0, 1), (1.0, 1.0, -3.0, 2)]);
        assert!(render_labeled_points(&cloud, &v, PlanarTranslation::ZERO).is_empty());
    }

    fn brute_zbuffer(
        cloud: &SemanticPointCloud,
        view: &ViewGeometry,
        t: PlanarTranslation,
    ) -> Vec<(usize, usize, u32)> {
        let mut all: Vec<(usize, usize, f64, f64, u32)> = Vec::new();
        for (i, p) in cloud.points.iter().enumerate() {
            let q = world_to_camera(&p.position, view, t);
            if let Some([u, v]) = project_pixel(&q, &view.intrinsics) {
                let d2 = (u - u.round()).powi(2) + (v - v.round()).powi(2);
                all.push((u.round() as usize, v.round() as usize, q.z, d2, i as u32));
            }
        }
        all.sort_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then(a.2.partial_cmp(&b.2).unwrap())
                .then(a.3.partial_cmp(&b.3).unwrap())
                .then(a.4.cmp(&b.4))
        });
        all.dedup_by(|b, a| (a.0, a.1) == (b.0, b.1));
        all.into_iter().map(|a| (a.0, a.1, a.4)).collect()
    }

    fn random_scene(seed: u64, n: usize) -> (SemanticPointCloud, ViewGeometry) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<_> = (0..n)
            .map(|_| {
                (
                    rng.random_range(-30.0..30.0),
                    rng.random_range(-30.0..30.0),
                    // Coarse heights create many exact depth ties.
                    (rng.random_range(0..4) as f64) * 2.0,
                    rng.random_range(0..8u8),
                )
            })
            .collect();
        let k = CameraIntrinsics::pinhole(60.0, 64, 48).unwrap();
        let view = ViewGeometry::nadir(k, 50.0, PlanarTranslation::new(1.0, -2.0), 0.3).unwrap();
        (cloud_of(&pts), view)
    }

    #[test]
    fn zbuffer_matches_brute_force() {
        for seed in 0..20 {
            let (cloud, view) = random_scene(seed, 3000);
            let t = PlanarTranslation::new(seed as f64 * 0.37 - 3.0, 1.25);
            let proj = render_labeled_points(&cloud, &view, t);
            let mut got: Vec<_> = proj
                .entries
                .iter()
                .map(|e| {
                    let (x, y) = e.pixel();
                    (x, y, e.source)
                })
                .collect();
            got.sort();
            assert_eq!(got, brute_zbuffer(&cloud, &view, t));
        }
    }

    #[test]
    fn prepared_view_matches_direct_render() {
        for seed in 0..10 {
            let (cloud, view) = random_scene(100 + seed, 2000);
            let prepared = PreparedView::new(&cloud, &view);
            let t = PlanarTranslation::new(-2.5 + seed as f64, 0.75);
            let a = render_labeled_points(&cloud, &view, t);
            let b = prepared.render(t);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert_eq!(x.source, y.source);
                assert!((x.u - y.u).abs() < 1e-9 && (x.v - y.v).abs() < 1e-9);
            }
            // Culling to a box around t keeps the same render.
            let subset = prepared.cull(t.tx - 1.0, t.tx + 1.0, t.ty - 0.5, t.ty + 0.5);
            assert!(subset.len() < prepared.len());
            let mut zb = ZBuffer::new(64, 48);
            let mut out = Vec::new();
            prepared.render_into(t, Some(&subset), &mut zb, &mut out);
            assert_eq!(out, b.entries);
        }
    }

    #[test]
    fn render_is_pixel_unique() {
        let (cloud, view) = random_scene(3, 5000);
        let proj = render_labeled_points(&cloud, &view, PlanarTranslation::new(0.5, 0.5));
        let mut keys: Vec<_> = proj.entries.iter().map(|e| e.pixel()).collect();
        let n = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), n);
        assert!(proj
            .entries
            .iter()
            .all(|e| e.u >= 0.0 && e.u < 64.0 && e.v >= 0.0 && e.v < 48.0 && e.depth > 0.0));
    }

    #[test]
    fn pixel_rounding_matches_std() {
        let edge = [0.0, 0.5, 1.5, 0.49999999999999994, 2.5 - 1e-15, 1e6 + 0.5, 1023.999999];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let random = (0..10_000).map(|_| rng.random_range(0.0..5000.0));
        for x in edge.into_iter().chain(random) {
            let (i, d) = round_nonneg(x);
            assert_eq!(i as f64, x.round(), "{x}");
            assert_eq!(d, x - x.round(), "{x}");
        }
    }

    proptest! {
        #[test]
        fn translation_equivariance(a in -20.0f64..20.0, b in -20.0f64..20.0, seed in 0u64..50) {
            let (cloud, view) = random_scene(seed, 500);
            let t = PlanarTranslation::new(0.3, -0.2);
            let base = render_labeled_points(&cloud, &view, t);
            let shifted = render_labeled_points(
                &cloud.translated(a, b, 0.0),
                &view,
                PlanarTranslation::new(t.tx + a, t.ty + b),
            );
            prop_assert_eq!(base.len(), shifted.len());
            for (x, y) in base.entries.iter().zip(&shifted.entries) {
                prop_assert_eq!(x.source, y.source);
                prop_assert_eq!(x.class, y.class);
                prop_assert!((x.u - y.u).abs() < 1e-9 && (x.v - y.v).abs() < 1e-9);
                prop_assert!((x.depth - y.depth).abs() < 1e-9);
            }
        }
    }
}
