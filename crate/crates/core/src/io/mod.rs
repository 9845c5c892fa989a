//! File formats: PLY clouds, PNG masks, CSV tables, JSONL results, SVG
//! plots and run manifests.

mod manifest;
mod mask_png;
mod ply;
mod results;
mod tables;

pub use manifest::{sha256_file, RunManifest};
pub use mask_png::{read_mask, write_mask};
pub use ply::{
    read_colored_cloud, read_edge_map, read_labeled_cloud, write_colored_cloud, write_edge_map,
    write_labeled_cloud,
};
pub use results::{
    read_frame_errors, read_results, write_bins_csv, write_frame_errors, write_gate_csv, write_results,
    write_scatter_svg, write_summary_csv, write_trajectory_svg, FrameResult,
};
pub use tables::{
    read_confusion, read_correspondences, read_homography, read_intrinsics, read_truth, read_views,
    write_confusion, write_correspondences, write_homography, write_intrinsics, write_truth, write_views,
    TruthRow, ViewRecord,
};

use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: {msg}", path.display())]
    Invalid { path: PathBuf, msg: String },
}

impl FormatError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        FormatError::Parse { path: path.to_path_buf(), line, msg: msg.into() }
    }

    pub(crate) fn invalid(path: &Path, msg: impl Into<String>) -> Self {
        FormatError::Invalid { path: path.to_path_buf(), msg: msg.into() }
    }
}

/// Resolve `p` against the directory of `base` unless it is absolute.
pub fn resolve_relative(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}
