//! Build a semantic edge map from an unlabelled (coloured) cloud and
//! segmented survey images, then compare it with the generator's labels.
//!
//! `cargo run --release --example build_semantic_map [out_dir]`

use semloc::io;
use semloc::semantic_map::{fuse_labels, voxelize_and_prune};
use semloc::synth::{colorize, generate_scene, mapping_views, SceneSpec};
use std::collections::HashMap;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SceneSpec { extent: 160.0, image_width: 128, image_height: 128, focal: 100.0, ..Default::default() };
    let scene = generate_scene(&spec)?;
    // What a photogrammetry pipeline would hand over: geometry and colour only.
    let colored = colorize(&scene.cloud);
    let views = mapping_views(&scene, 30.0);
    let labeled = fuse_labels(&colored, &views)?;
    println!("{} of {} points labelled from {} views", labeled.len(), colored.len(), views.len());

    // Agreement with the generator's labels, by position.
    let key = |p: &nalgebra::Point3<f64>| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
    let truth: HashMap<_, u8> = scene.cloud.points.iter().map(|p| (key(&p.position), p.class)).collect();
    let agree = labeled.points.iter().filter(|p| truth[&key(&p.position)] == p.class).count();
    println!("label agreement {:.2}%", 100.0 * agree as f64 / labeled.len() as f64);

    // Each survey pixel (about 1 m) labels one point, so use cells coarse
    // enough to be face-connected.
    let edges = voxelize_and_prune(&labeled, 2.0)?;
    println!(
        "{} voxels -> {} edge voxels ({:.1}% kept)",
        edges.input_voxels(),
        edges.len(),
        100.0 * edges.retained_fraction()
    );
    let hist = edges.to_cloud().class_histogram();
    for (class, n) in hist.iter().enumerate().filter(|(_, &n)| n > 0) {
        println!("  {:<18} {n}", semloc::classes::class_name(class as u8, hist.len()));
    }

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        io::write_labeled_cloud(&dir.join("labeled.ply"), &labeled)?;
        io::write_edge_map(&dir.join("edges.ply"), &edges)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
