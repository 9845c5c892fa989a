//! Edge extraction, clamped distance fields and the two loss terms on a tiny
//! hand-made mask.
//!
//! `cargo run --example distance_fields`

use semloc::alignment::{build_distance_fields, extract_edges, forward_loss, reverse_loss, LossConfig};
use semloc::geometry::{PlanarTranslation, ProjectedPoint, ProjectedSemanticPoints};
use semloc::mask::SegmentationMask;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Ground (3) with a building (1) occupying a block in the middle.
    let (w, h) = (24, 12);
    let rows: Vec<Vec<u8>> = (0..h)
        .map(|y| (0..w).map(|x| if (8..16).contains(&x) && (3..9).contains(&y) { 1 } else { 3 }).collect())
        .collect();
    let mask = SegmentationMask::from_rows(&rows, 8)?;
    let edges = extract_edges(&mask);
    let cfg = LossConfig::default();
    let fields = build_distance_fields(&edges, cfg.d_max);
    println!("edge pixels: {} building, {} ground", edges.class(1).len(), edges.class(3).len());

    println!("building distance field (clamped at {} px):", cfg.d_max);
    for y in 0..h {
        let line: String = (0..w)
            .map(|x| match fields.at(1, x, y) {
                d if d == 0.0 => '#',
                d if d >= cfg.d_max => '.',
                d => char::from_digit(d.round() as u32, 10).unwrap_or('?'),
            })
            .collect();
        println!("  {line}");
    }

    // Project every edge pixel shifted by s pixels and score the result.
    for s in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let entries = (0..8u8)
            .flat_map(|c| edges.class(c.into()).iter().map(move |&[x, y]| (c, x, y)))
            .enumerate()
            .map(|(i, (class, x, y))| ProjectedPoint { u: x as f64 + s, v: y as f64, class, depth: 100.0, source: i as u32 })
            .filter(|p| p.u <= (w - 1) as f64)
            .collect();
        let proj = ProjectedSemanticPoints { entries, translation: PlanarTranslation::new(s, 0.0) };
        println!(
            "shift {s:>3} px: forward {:.3}, reverse {:.3}",
            forward_loss(&proj, &fields, &cfg)?,
            reverse_loss(&edges, &proj, &cfg)?
        );
    }
    Ok(())
}
