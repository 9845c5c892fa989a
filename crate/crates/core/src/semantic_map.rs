//! Map construction: multi-view label fusion onto a coloured cloud and
//! voxel pruning down to class-transition structure.

use crate::classes::{majority, IGNORE};
use crate::cloud::{ColoredPointCloud, SemanticPoint, SemanticPointCloud};
use crate::geometry::{render_with_pose, GeometryError, PlanarTranslation, RigidPose, ViewGeometry, ZBuffer};
use crate::mask::SegmentationMask;
use nalgebra::Point3;
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_VOXEL_SIZE: f64 = 0.5;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MapError {
    #[error("no views given")]
    NoViews,
    #[error("input cloud is empty")]
    EmptyCloud,
    #[error("no point received a label; the fused map is empty")]
    EmptyMap,
    #[error("view {index}: mask is {mask:?} but intrinsics are {intr:?}")]
    MaskSize {
        index: usize,
        mask: (usize, usize),
        intr: (usize, usize),
    },
    #[error("view {0}: class count {1} differs from {2}")]
    ClassCount(usize, usize, usize),
    #[error("voxel size must be positive and finite, got {0}")]
    VoxelSize(f64),
    #[error("voxel class {0} outside the {1}-class vocabulary")]
    VoxelClass(u8, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A segmented image together with where it was taken from.
#[derive(Debug, Clone)]
pub struct LabeledView {
    pub mask: SegmentationMask,
    pub view: ViewGeometry,
    /// World→camera transform of this image.
    pub pose: RigidPose,
}

impl LabeledView {
    pub fn new(mask: SegmentationMask, view: ViewGeometry, pose: RigidPose) -> Result<Self, MapError> {
        let intr = &view.intrinsics;
        if (mask.width(), mask.height()) != (intr.width, intr.height) {
            return Err(MapError::MaskSize {
                index: 0,
                mask: (mask.width(), mask.height()),
                intr: (intr.width, intr.height),
            });
        }
        Ok(Self { mask, view, pose })
    }

    /// Image taken exactly at the view's prior-plus-`t` camera position.
    pub fn at(mask: SegmentationMask, view: ViewGeometry, t: PlanarTranslation) -> Result<Self, MapError> {
        let pose = view.world_to_camera_pose(t);
        Self::new(mask, view, pose)
    }
}

/// Per-point vote counts (`points x classes`) from the views in which each
/// point is the front-most surface at its pixel.
pub fn collect_votes(cloud: &ColoredPointCloud, views: &[LabeledView]) -> Result<Vec<u32>, MapError> {
    let k = views.first().ok_or(MapError::NoViews)?.mask.num_classes();
    for (i, lv) in views.iter().enumerate() {
        let intr = &lv.view.intrinsics;
        if (lv.mask.width(), lv.mask.height()) != (intr.width, intr.height) {
            return Err(MapError::MaskSize {
                index: i,
                mask: (lv.mask.width(), lv.mask.height()),
                intr: (intr.width, intr.height),
            });
        }
        if lv.mask.num_classes() != k {
            return Err(MapError::ClassCount(i, lv.mask.num_classes(), k));
        }
    }
    let n = cloud.len();
    // Each view yields (point, label) pairs; tallies are order-independent.
    let per_view: Vec<Vec<(u32, u8)>> = views
        .par_iter()
        .map(|lv| {
            let intr = &lv.view.intrinsics;
            let mut zbuf = ZBuffer::new(intr.width, intr.height);
            let mut visible = Vec::new();
            render_with_pose(
                cloud.points.iter().map(|p| (p.position, 0u8)),
                &lv.pose,
                intr,
                &mut zbuf,
                &mut visible,
            );
            visible
                .iter()
                .filter_map(|e| {
                    let (x, y) = e.pixel();
                    let l = lv.mask.get(x, y);
                    (l != IGNORE).then_some((e.source, l))
                })
                .collect()
        })
        .collect();
    let mut votes = vec![0u32; n * k];
    for (i, l) in per_view.into_iter().flatten() {
        votes[i as usize * k + l as usize] += 1;
    }
    Ok(votes)
}

/// Majority-vote labelling. Points no view labels are dropped; `support`
/// counts the views that voted.
pub fn fuse_labels(cloud: &ColoredPointCloud, views: &[LabeledView]) -> Result<SemanticPointCloud, MapError> {
    if cloud.is_empty() {
        return Err(MapError::EmptyCloud);
    }
    let votes = collect_votes(cloud, views)?;
    let k = views[0].mask.num_classes();
    let points: Vec<SemanticPoint> = cloud
        .points
        .iter()
        .zip(votes.chunks_exact(k))
        .filter_map(|(p, counts)| {
            majority(counts).map(|class| SemanticPoint {
                position: p.position,
                class,
                support: counts.iter().sum::<u32>().min(u16::MAX as u32) as u16,
            })
        })
        .collect();
    if points.is_empty() {
        return Err(MapError::EmptyMap);
    }
    Ok(SemanticPointCloud::new(points, k, cloud.datum))
}

/// Voxel containing `p` for a lattice whose cell centres sit at
/// `index * size`.
#[inline]
pub fn voxel_index(p: &Point3<f64>, size: f64) -> [i64; 3] {
    [
        (p.x / size).round() as i64,
        (p.y / size).round() as i64,
        (p.z / size).round() as i64,
    ]
}

pub const FACE_NEIGHBOURS: [[i64; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeVoxel {
    pub index: [i64; 3],
    pub class: u8,
    /// Member points of the voxel.
    pub members: u32,
}

/// Class-transition voxels of a labelled map.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelEdgeMap {
    voxel_size: f64,
    num_classes: usize,
    datum: crate::cloud::Datum,
    /// Occupied voxels before pruning.
    input_voxels: usize,
    /// Retained voxels sorted by index.
    voxels: Vec<EdgeVoxel>,
}

impl VoxelEdgeMap {
    /// Reassemble a map from stored voxels (e.g. read back from disk).
    pub fn from_parts(
        voxel_size: f64,
        num_classes: usize,
        datum: crate::cloud::Datum,
        input_voxels: usize,
        mut voxels: Vec<EdgeVoxel>,
    ) -> Result<Self, MapError> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(MapError::VoxelSize(voxel_size));
        }
        if let Some(v) = voxels.iter().find(|v| v.class as usize >= num_classes) {
            return Err(MapError::VoxelClass(v.class, num_classes));
        }
        voxels.sort_by_key(|v| v.index);
        Ok(Self {
            voxel_size,
            num_classes,
            datum,
            input_voxels: input_voxels.max(voxels.len()),
            voxels,
        })
    }

    pub fn datum(&self) -> crate::cloud::Datum {
        self.datum
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn input_voxels(&self) -> usize {
        self.input_voxels
    }

    pub fn voxels(&self) -> &[EdgeVoxel] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// Retained / occupied voxels (0 for an empty input).
    pub fn retained_fraction(&self) -> f64 {
        if self.input_voxels == 0 {
            0.0
        } else {
            self.voxels.len() as f64 / self.input_voxels as f64
        }
    }

    /// One point per retained voxel at its centre.
    pub fn to_cloud(&self) -> SemanticPointCloud {
        let s = self.voxel_size;
        let points = self
            .voxels
            .iter()
            .map(|v| SemanticPoint {
                position: Point3::new(v.index[0] as f64 * s, v.index[1] as f64 * s, v.index[2] as f64 * s),
                class: v.class,
                support: v.members.min(u16::MAX as u32) as u16,
            })
            .collect();
        SemanticPointCloud::new(points, self.num_classes, self.datum)
    }
}

/// Occupied voxels with their majority class and member count.
pub fn voxelize(map: &SemanticPointCloud, voxel_size: f64) -> Result<HashMap<[i64; 3], (u8, u32)>, MapError> {
    if !(voxel_size > 0.0 && voxel_size.is_finite()) {
        return Err(MapError::VoxelSize(voxel_size));
    }
    let k = map.num_classes;
    let mut counts: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    for p in &map.points {
        counts.entry(voxel_index(&p.position, voxel_size)).or_insert_with(|| vec![0; k])[p.class as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(idx, c)| (idx, (majority(&c).expect("occupied voxel"), c.iter().sum())))
        .collect())
}

/// Keep voxels with at least one face-adjacent occupied voxel of another
/// class. Empty neighbours are not transitions.
pub fn voxelize_and_prune(map: &SemanticPointCloud, voxel_size: f64) -> Result<VoxelEdgeMap, MapError> {
    let grid = voxelize(map, voxel_size)?;
    let mut voxels: Vec<EdgeVoxel> = grid
        .iter()
        .filter(|(idx, (class, _))| {
            FACE_NEIGHBOURS.iter().any(|d| {
                let n = [idx[0] + d[0], idx[1] + d[1], idx[2] + d[2]];
                matches!(grid.get(&n), Some((c, _)) if c != class)
            })
        })
        .map(|(&index, &(class, members))| EdgeVoxel { index, class, members })
        .collect();
    voxels.sort_unstable_by_key(|v| v.index);
    Ok(VoxelEdgeMap {
        voxel_size,
        num_classes: map.num_classes,
        datum: map.datum,
        input_voxels: grid.len(),
        voxels,
    })
}
