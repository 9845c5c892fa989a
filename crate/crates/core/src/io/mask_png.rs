//! Masks as 8-bit single-channel PNG: pixel value = class id, 255 = ignore.

use super::FormatError;
use crate::mask::SegmentationMask;
use image::{GrayImage, ImageReader, Luma};
use std::path::Path;

pub fn write_mask(path: &Path, mask: &SegmentationMask) -> Result<(), FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FormatError::io(path, e))?;
    }
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, mask.labels().to_vec())
        .expect("buffer matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| FormatError::invalid(path, e.to_string()))
}

/// Reads a PNG as labels. Multi-channel images are rejected rather than
/// converted, since a colour palette is not a class map.
pub fn read_mask(path: &Path, num_classes: usize) -> Result<SegmentationMask, FormatError> {
    let img = ImageReader::open(path)
        .map_err(|e| FormatError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| FormatError::io(path, e))?
        .decode()
        .map_err(|e| FormatError::invalid(path, e.to_string()))?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(FormatError::invalid(
                path,
                format!("expected an 8-bit single-channel mask, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = gray.dimensions();
    let labels: Vec<u8> = gray.pixels().map(|&Luma([v])| v).collect();
    SegmentationMask::new(w as usize, h as usize, num_classes, labels).map_err(|e| FormatError::invalid(path, e.to_string()))
}
