//! Accuracy tables for a set of localization errors: overall metrics with
//! and without bias removal, edge-count bins, an evidence-gate sweep and a
//! per-dataset summary.
//!
//! `cargo run --example evaluate_trajectory`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semloc::evaluation::{bin_by_edges, compute_metrics, dataset_summary, gate_sweep, FrameError};
use semloc::geometry::PlanarTranslation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two flights; error spread shrinks as edge evidence grows, and the
    // second flight carries a constant offset.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut errors = Vec::new();
    for (flight, offset) in [("flight_a", [0.0, 0.0]), ("flight_b", [1.5, -0.8])] {
        for i in 0..200 {
            let edges = rng.random_range(1_000..30_000usize);
            let sigma = 4.0 * (3_000.0 / edges as f64).sqrt();
            let truth = PlanarTranslation::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
            let est = PlanarTranslation::new(
                truth.tx + offset[0] + sigma * rng.random_range(-1.0..1.0),
                truth.ty + offset[1] + sigma * rng.random_range(-1.0..1.0),
            );
            errors.push(FrameError::new(format!("{flight}_{i:04}"), est, truth, edges, edges < 8_000)?.with_dataset(flight));
        }
    }

    let raw = compute_metrics(&errors, false)?;
    let corrected = compute_metrics(&errors, true)?;
    println!("raw:            RMSE_2D {:.3} m, median {:.3} m", raw.rmse_2d, raw.median_2d);
    println!("bias-corrected: RMSE_2D {:.3} m, median {:.3} m", corrected.rmse_2d, corrected.median_2d);

    println!("\nedge-count bins (width 5500, origin 1749):");
    for b in bin_by_edges(&errors, 5500.0, 1749.0, true)? {
        match (b.mean_2d, b.std_2d) {
            (Some(m), Some(s)) => println!("  [{:>6}, {:>6})  n={:<4} mean {m:.3} m, std {s:.3} m", b.lo, b.hi, b.n),
            _ => println!("  [{:>6}, {:>6})  n=0", b.lo, b.hi),
        }
    }

    println!("\nevidence gate sweep:");
    for g in gate_sweep(&errors, &[0, 4_000, 8_000, 16_000], true)? {
        let rmse = g.metrics.as_ref().map_or("-".to_string(), |m| format!("{:.3} m", m.rmse_2d));
        println!("  >= {:>6} edges: {:>5.1}% kept, RMSE_2D {rmse}", g.threshold, 100.0 * g.retained_fraction);
    }

    println!("\nper dataset:");
    for row in dataset_summary(&errors, true)? {
        let m = &row.metrics;
        println!(
            "  {:<26} N={:<4} RMSE_2D {:.3} m  bias ({:+.2}, {:+.2})",
            row.label, m.n, m.rmse_2d, m.bias[0], m.bias[1]
        );
    }
    Ok(())
}
