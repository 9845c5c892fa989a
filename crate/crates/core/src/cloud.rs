//! Point cloud containers: coloured reconstructions and class-labelled maps.

use crate::classes::IGNORE;
use nalgebra::Point3;
use serde::{Deserialize, Serialize};

/// Local ENU frame origin that all cloud coordinates are relative to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Datum {
    /// Origin of the local frame in the external reference (m).
    pub origin: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredPoint {
    pub position: Point3<f64>,
    pub color: [u8; 3],
}

/// Geo-referenced coloured cloud as produced by a photogrammetry pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColoredPointCloud {
    pub points: Vec<ColoredPoint>,
    pub datum: Datum,
}

impl ColoredPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every coordinate is finite.
    pub fn is_finite(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.position.iter().all(|c| c.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemanticPoint {
    pub position: Point3<f64>,
    pub class: u8,
    /// Number of observations behind the label (views for fused maps,
    /// member points for voxel representatives).
    pub support: u16,
}

/// Class-labelled map. Every class id is in `[0, num_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticPointCloud {
    pub points: Vec<SemanticPoint>,
    pub num_classes: usize,
    pub datum: Datum,
}

impl SemanticPointCloud {
    pub fn new(points: Vec<SemanticPoint>, num_classes: usize, datum: Datum) -> Self {
        debug_assert!(points
            .iter()
            .all(|p| p.class != IGNORE && (p.class as usize) < num_classes && p.support >= 1));
        Self {
            points,
            num_classes,
            datum,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same cloud with every point moved by `(dx, dy, dz)`.
    pub fn translated(&self, dx: f64, dy: f64, dz: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.position.x += dx;
            p.position.y += dy;
            p.position.z += dz;
        }
        out
    }

    /// Per-class point counts.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes];
        for p in &self.points {
            h[p.class as usize] += 1;
        }
        h
    }
}
