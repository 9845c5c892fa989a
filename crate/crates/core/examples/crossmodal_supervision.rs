//! Cross-modal supervision: transfer labels between image planes with a
//! fitted homography, estimate a confusion matrix for a noisy segmenter,
//! and use it during localization.
//!
//! `cargo run --release --example crossmodal_supervision`

use semloc::alignment::LossConfig;
use semloc::crossmodal::{estimate_confusion, fit_homography, warp_mask, ConfusionMatrix, CorrespondenceSet, Homography};
use semloc::semantic_map::voxelize_and_prune;
use semloc::solver::{localize_trajectory, SearchConfig};
use semloc::synth::{corrupt_mask, generate_scene, sample_frames, CorruptionSpec, FrameSampling, SceneSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SceneSpec {
        seed: 61,
        extent: 300.0,
        buildings: 8,
        strips: 2,
        discs: 6,
        orientation: [0.0, std::f64::consts::PI],
        image_width: 128,
        image_height: 128,
        focal: 100.0,
        ..Default::default()
    };
    let scene = generate_scene(&spec)?;
    let map = voxelize_and_prune(&scene.cloud, 0.5)?;

    // 1. Label transfer: a reference annotation lives in another image
    // plane related by a homography known only through tie points.
    let calib = sample_frames(&scene, &FrameSampling { count: 30, seed: 3, ..Default::default() });
    let h_true = Homography::new(nalgebra::Matrix3::new(0.9, 0.05, 6.0, -0.04, 0.95, 4.0, 2e-4, 1e-4, 1.0))?;
    let ties: Vec<([f64; 2], [f64; 2])> = [[5.0, 5.0], [120.0, 8.0], [10.0, 118.0], [122.0, 121.0], [60.0, 40.0], [33.0, 90.0]]
        .iter()
        .map(|&q| Ok((q, h_true.apply(q).ok_or("tie point at infinity")?)))
        .collect::<Result<_, &str>>()?;
    let fit = fit_homography(&CorrespondenceSet::new(ties)?)?;
    println!("homography from 6 tie points: RMS {:.2e} px, max |dH| {:.2e}", fit.rms, fit.homography.max_abs_diff(&h_true));
    let reference: Vec<_> = calib
        .iter()
        .map(|f| {
            let other_plane = warp_mask(&f.truth, &h_true, (128, 128));
            warp_mask(&other_plane, &fit.homography.inverse(), (128, 128))
        })
        .collect();

    // 2. A segmenter that confuses building/impervious and tree/low
    // vegetation in large patches.
    let mut rows: Vec<Vec<f64>> = (0..8).map(|i| (0..8).map(|j| (i == j) as u8 as f64).collect()).collect();
    for (a, b) in [(1, 2), (4, 5)] {
        rows[a][a] = 0.7;
        rows[a][b] = 0.3;
        rows[b][b] = 0.7;
        rows[b][a] = 0.3;
    }
    let noise = CorruptionSpec { flip_rate: 1.0, flip_block: 16, confusion: Some(ConfusionMatrix::new(rows)?), ..Default::default() };
    let predicted = calib
        .iter()
        .enumerate()
        .map(|(i, f)| corrupt_mask(&f.truth, &noise, 100 + i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    let c = estimate_confusion(&predicted, &reference)?;
    println!("estimated P(pred | true) for building row: {:.2?}", c.row(1));

    // 3. Localize fresh frames with and without the confusion model.
    let frames = sample_frames(&scene, &FrameSampling { count: 40, seed: 4, ..Default::default() });
    let inputs = frames
        .iter()
        .enumerate()
        .map(|(i, f)| Ok((corrupt_mask(&f.truth, &noise, 500 + i as u64)?, f.view)))
        .collect::<Result<Vec<_>, semloc::synth::SynthError>>()?;
    let search = SearchConfig { gate_threshold: 0, ..Default::default() };
    for (name, cfg) in [
        ("hard labels", LossConfig::default()),
        ("confusion-aware", LossConfig { confusion: Some(c), ..Default::default() }),
    ] {
        let errs: Vec<f64> = localize_trajectory(&map, &inputs, &cfg, &search)
            .iter()
            .zip(&frames)
            .map(|(r, f)| r.as_ref().map_or(f64::NAN, |r| (r.t_star.tx - f.t_true.tx).hypot(r.t_star.ty - f.t_true.ty)))
            .collect();
        println!("{name:>16}: mean error {:.3} m over {} frames", errs.iter().sum::<f64>() / errs.len() as f64, errs.len());
    }
    Ok(())
}
