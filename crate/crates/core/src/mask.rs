//! Dense per-pixel class-index images.

use crate::classes::IGNORE;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("mask dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("label buffer has {got} entries, expected {expected}")]
    BufferSize { expected: usize, got: usize },
    #[error("label {label} at pixel ({x}, {y}) is outside [0, {num_classes}) and is not the ignore label")]
    InvalidLabel {
        label: u8,
        x: usize,
        y: usize,
        num_classes: usize,
    },
    #[error("class count must be in 1..=255, got {0}")]
    ClassCount(usize),
}

/// Row-major label image. Pixel `(x, y)` is column `x`, row `y`; labels are
/// class ids in `[0, num_classes)` or [`IGNORE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMask {
    width: usize,
    height: usize,
    num_classes: usize,
    labels: Vec<u8>,
}

impl SegmentationMask {
    pub fn new(
        width: usize,
        height: usize,
        num_classes: usize,
        labels: Vec<u8>,
    ) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::EmptyDimensions { width, height });
        }
        if num_classes == 0 || num_classes >= IGNORE as usize {
            return Err(MaskError::ClassCount(num_classes));
        }
        if labels.len() != width * height {
            return Err(MaskError::BufferSize {
                expected: width * height,
                got: labels.len(),
            });
        }
        if let Some(i) = labels
            .iter()
            .position(|&l| l != IGNORE && l as usize >= num_classes)
        {
            return Err(MaskError::InvalidLabel {
                label: labels[i],
                x: i % width,
                y: i / width,
                num_classes,
            });
        }
        Ok(Self {
            width,
            height,
            num_classes,
            labels,
        })
    }

    /// A mask where every pixel carries `label`.
    pub fn filled(
        width: usize,
        height: usize,
        num_classes: usize,
        label: u8,
    ) -> Result<Self, MaskError> {
        Self::new(width, height, num_classes, vec![label; width * height])
    }

    /// Build from rows of labels (`rows[y][x]`).
    pub fn from_rows(rows: &[Vec<u8>], num_classes: usize) -> Result<Self, MaskError> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let mut labels = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(MaskError::BufferSize {
                    expected: width * height,
                    got: labels.len() + row.len(),
                });
            }
            labels.extend_from_slice(row);
        }
        Self::new(width, height, num_classes, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    /// Label at signed coordinates, `None` outside the image.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<u8> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(self.labels[y as usize * self.width + x as usize])
        }
    }

    /// Overwrite one pixel. Panics if `label` is not valid for this mask.
    pub fn set(&mut self, x: usize, y: usize, label: u8) {
        assert!(
            label == IGNORE || (label as usize) < self.num_classes,
            "invalid label {label}"
        );
        self.labels[y * self.width + x] = label;
    }

    /// Number of non-ignore pixels.
    pub fn valid_pixels(&self) -> usize {
        self.labels.iter().filter(|&&l| l != IGNORE).count()
    }

    /// Sorted set of labels present in the mask (including ignore).
    pub fn label_set(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (0..=255u8).filter(|&l| seen[l as usize]).collect()
    }

    /// Apply a class relabeling; ignore stays ignore.
    pub fn relabel(&self, perm: &[u8]) -> Self {
        let labels = self
            .labels
            .iter()
            .map(|&l| if l == IGNORE { IGNORE } else { perm[l as usize] })
            .collect();
        Self {
            labels,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            SegmentationMask::new(0, 3, 8, vec![]),
            Err(MaskError::EmptyDimensions { .. })
        ));
        assert!(matches!(
            SegmentationMask::new(2, 2, 8, vec![0; 3]),
            Err(MaskError::BufferSize { .. })
        ));
        assert_eq!(
            SegmentationMask::new(2, 1, 2, vec![0, 5]),
            Err(MaskError::InvalidLabel {
                label: 5,
                x: 1,
                y: 0,
                num_classes: 2
            })
        );
        assert!(SegmentationMask::new(2, 1, 2, vec![1, IGNORE]).is_ok());
    }

    #[test]
    fn accessors() {
        let m = SegmentationMask::from_rows(&[vec![0, 1], vec![IGNORE, 1]], 2).unwrap();
        assert_eq!(m.get(1, 0), 1);
        assert_eq!(m.get_checked(-1, 0), None);
        assert_eq!(m.valid_pixels(), 3);
        assert_eq!(m.label_set(), vec![0, 1, IGNORE]);
        assert_eq!(m.relabel(&[1, 0]).labels(), &[1, 0, IGNORE, 0]);
    }
}
