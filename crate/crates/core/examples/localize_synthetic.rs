//! Localize corrupted synthetic frames against a pruned edge map and report
//! accuracy.
//!
//! `cargo run --release --example localize_synthetic [frames]`

use semloc::alignment::LossConfig;
use semloc::evaluation::{compute_metrics, FrameError};
use semloc::semantic_map::voxelize_and_prune;
use semloc::solver::{localize_trajectory, SearchConfig};
use semloc::synth::{corrupt_mask, generate_scene, sample_frames, CorruptionSpec, FrameSampling, SceneSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).map_or(Ok(12), |s| s.parse())?;
    let spec = SceneSpec {
        orientation: [0.0, std::f64::consts::PI],
        image_width: 192,
        image_height: 192,
        focal: 150.0,
        extent: 300.0,
        buildings: 40,
        discs: 20,
        ..Default::default()
    };
    let scene = generate_scene(&spec)?;
    let map = voxelize_and_prune(&scene.cloud, 0.5)?;
    println!(
        "world: {} points -> {} edge voxels ({:.1}% kept)",
        scene.cloud.len(),
        map.len(),
        100.0 * map.retained_fraction()
    );

    let frames = sample_frames(&scene, &FrameSampling { count, seed: 1, ..Default::default() });
    let noise = CorruptionSpec { flip_rate: 0.05, flip_block: 4, boundary_jitter: 1.0, ..Default::default() };
    let inputs = frames
        .iter()
        .enumerate()
        .map(|(i, f)| Ok((corrupt_mask(&f.truth, &noise, i as u64)?, f.view)))
        .collect::<Result<Vec<_>, semloc::synth::SynthError>>()?;

    // Small images never reach the default evidence gate; keep every frame.
    let search = SearchConfig { gate_threshold: 2000, ..Default::default() };
    let results = localize_trajectory(&map, &inputs, &LossConfig::default(), &search);

    let mut errors = Vec::new();
    println!("{:<12} {:>16} {:>16} {:>8} {:>7}", "frame", "truth (m)", "estimate (m)", "edges", "error");
    for (f, r) in frames.iter().zip(results) {
        match r {
            Ok(r) => {
                let e = FrameError::new(&f.id, r.t_star, f.t_true, r.edge_count, r.gated)?;
                println!(
                    "{:<12} ({:>6.2},{:>6.2}) ({:>6.2},{:>6.2}) {:>8} {:>6.2}{}",
                    f.id,
                    f.t_true.tx,
                    f.t_true.ty,
                    r.t_star.tx,
                    r.t_star.ty,
                    r.edge_count,
                    e.norm(),
                    if r.gated { " gated" } else { "" }
                );
                errors.push(e);
            }
            Err(e) => println!("{:<12} failed: {e}", f.id),
        }
    }
    let m = compute_metrics(&errors, false)?;
    println!(
        "RMSE_2D {:.3} m, median {:.3} m, {:.0}% under 2 m, bias ({:.3}, {:.3}) m",
        m.rmse_2d, m.median_2d, m.pct_under_2m, m.bias[0], m.bias[1]
    );
    Ok(())
}
