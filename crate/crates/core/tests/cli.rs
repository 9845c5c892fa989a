//! End-to-end runs of the command-line tool, in process.

use semloc::alignment::LossConfig;
use semloc::cli::{run, EXIT_DEGRADED, EXIT_INPUT, EXIT_OK};
use semloc::crossmodal::{warp_mask, ConfusionMatrix, Homography};
use semloc::io::{self, RunManifest};
use semloc::mask::SegmentationMask;
use semloc::solver::{localize_frame, SearchConfig};
use semloc::synth::{generate_scene, sample_frames, FrameSampling, SceneSpec};
use std::path::{Path, PathBuf};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn semloc(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("semloc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Small synthetic world shared by most tests.
const SYNTH: [&str; 16] = [
    "--set", "extent=160", "--set", "frames=6", "--set", "image_width=64", "--set", "image_height=64", "--set",
    "focal=100", "--set", "building_height=0,0", "--set", "walls=false", "--set", "orientation=0,3.14159",
];

fn synth_into(dir: &Path, extra: &[&str]) -> Run {
    let mut args = vec!["synth", "--out", p(dir)];
    args.extend_from_slice(&SYNTH);
    args.extend_from_slice(extra);
    semloc(&args)
}

fn synth_spec() -> (SceneSpec, FrameSampling) {
    let spec = SceneSpec {
        extent: 160.0,
        image_width: 64,
        image_height: 64,
        focal: 100.0,
        building_height: [0.0, 0.0],
        walls: false,
        orientation: [0.0, 3.14159],
        ..Default::default()
    };
    (spec, FrameSampling { count: 6, ..Default::default() })
}

fn files_equal(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

#[test]
fn synth_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let r = synth_into(dir.path(), &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    for f in ["world_colored.ply", "world_labeled.ply", "edges.ply", "intrinsics.csv", "frames.csv", "truth.csv", "settings.cfg", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let m = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.command, "synth");
    assert_eq!(m.config["frames"], "6");
    assert!(m.outputs.iter().any(|o| o.ends_with("truth.csv")));

    // Generated truth loads back identically.
    let (spec, sampling) = synth_spec();
    let scene = generate_scene(&spec).unwrap();
    let frames = sample_frames(&scene, &sampling);
    let truth = io::read_truth(&dir.path().join("truth.csv")).unwrap();
    assert_eq!(truth.len(), frames.len());
    for (t, f) in truth.iter().zip(&frames) {
        assert_eq!(t.frame_id, f.id);
        assert_eq!(t.t, f.t_true);
    }
    // Zero corruption: stored masks are the truth masks.
    let mask = io::read_mask(&dir.path().join("masks/frame_00000.png"), 8).unwrap();
    assert_eq!(mask, frames[0].truth);
}

#[test]
fn synth_is_seed_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let extra = ["--set", "flip_rate=0.1", "--set", "seed=5"];
    assert_eq!(synth_into(a.path(), &extra).code, EXIT_OK);
    assert_eq!(synth_into(b.path(), &extra).code, EXIT_OK);
    for f in ["edges.ply", "frames.csv", "truth.csv", "masks/frame_00003.png", "world_labeled.ply"] {
        assert!(files_equal(&a.path().join(f), &b.path().join(f)), "{f} differs");
    }
    let c = tempfile::tempdir().unwrap();
    synth_into(c.path(), &["--set", "seed=6"]);
    assert!(!files_equal(&a.path().join("edges.ply"), &c.path().join("edges.ply")));
}

#[test]
fn pipeline_matches_library_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(synth_into(d, &["--mapping-spacing", "40"]).code, EXIT_OK);

    let built = d.join("built.ply");
    let r = semloc(&[
        "map-build", "--cloud", p(&d.join("world_colored.ply")), "--views", p(&d.join("mapping_views.csv")),
        "--intrinsics", p(&d.join("intrinsics.csv")), "--out", p(&built),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(io::read_labeled_cloud(&built, 8).unwrap().len() > 1000);

    let edges = d.join("built_edges.ply");
    // One labelled point per survey pixel (1 m) leaves 0.5 m cells isolated.
    let r = semloc(&["map-prune", "--map", p(&built), "--voxel-size", "2", "--out", p(&edges)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);

    let results = d.join("results.jsonl");
    let localize = |out: &Path| {
        semloc(&[
            "localize", "--map", p(&edges), "--frames", p(&d.join("frames.csv")), "--intrinsics",
            p(&d.join("intrinsics.csv")), "--set", "gate_threshold=0", "--out", p(out),
        ])
    };
    let r = localize(&results);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("localized 6 frames: 0 gated, 0 failed"), "{}", r.stdout);
    assert!(d.join("results.jsonl.manifest.json").exists());

    // Same numbers as calling the solver directly on the loaded inputs.
    let map = io::read_edge_map(&edges).unwrap();
    let cams = io::read_intrinsics(&d.join("intrinsics.csv")).unwrap();
    let views = io::read_views(&d.join("frames.csv")).unwrap();
    let got = io::read_results(&results).unwrap();
    assert_eq!(got.len(), views.len());
    let search = SearchConfig { gate_threshold: 0, ..Default::default() };
    for (rec, res) in views.iter().zip(&got) {
        let view = rec.to_view(&cams, &d.join("frames.csv")).unwrap();
        let mask = io::read_mask(&d.join(&rec.image), 8).unwrap();
        let want = localize_frame(&map, &mask, &view, &LossConfig::default(), &search).unwrap();
        let res = res.result.as_ref().unwrap();
        assert_eq!(res.t_star, want.t_star);
        assert_eq!(res.loss, want.loss);
        assert_eq!(res.edge_count, want.edge_count);
    }

    // Reruns agree apart from timing.
    let again = d.join("again.jsonl");
    assert_eq!(localize(&again).code, EXIT_OK);
    let strip = |path: &PathBuf| {
        io::read_results(path)
            .unwrap()
            .into_iter()
            .map(|mut r| {
                r.result.as_mut().unwrap().wall_time_s = 0.0;
                r
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&results), strip(&again));

    // Evaluation against the generated truth.
    let eval_dir = d.join("eval");
    let r = semloc(&[
        "eval", "--results", p(&results), "--truth", p(&d.join("truth.csv")), "--out-dir", p(&eval_dir), "--gate",
        "0,500,100000",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    for f in ["summary.csv", "edge_bins.csv", "gate_sweep.csv", "frame_errors.jsonl", "error_vs_edges.svg", "trajectory.svg", "manifest.json"] {
        assert!(eval_dir.join(f).exists(), "{f} missing");
    }
    let gate = std::fs::read_to_string(eval_dir.join("gate_sweep.csv")).unwrap();
    let rows: Vec<&str> = gate.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("100000,0,"));
    let errors = io::read_frame_errors(&eval_dir.join("frame_errors.jsonl")).unwrap();
    assert_eq!(errors.len(), 6);
    assert!(errors.iter().all(|e| e.norm() < 1.0), "{errors:?}");
}

#[test]
fn localize_flags_gated_frames() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &[]);
    let r = semloc(&[
        "localize", "--map", p(&d.join("edges.ply")), "--frames", p(&d.join("frames.csv")), "--intrinsics",
        p(&d.join("intrinsics.csv")), "--out", p(&d.join("r.jsonl")),
    ]);
    // 64x64 masks never reach the default 8000 edge pixels.
    assert_eq!(r.code, EXIT_DEGRADED);
    let res = io::read_results(&d.join("r.jsonl")).unwrap();
    assert!(res.iter().all(|r| r.result.as_ref().unwrap().gated));
}

#[test]
fn localize_rejects_empty_frame_list() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &[]);
    let frames = d.join("none.csv");
    let header = std::fs::read_to_string(d.join("frames.csv")).unwrap().lines().next().unwrap().to_string();
    std::fs::write(&frames, header + "\n").unwrap();
    let r = semloc(&[
        "localize", "--map", p(&d.join("edges.ply")), "--frames", p(&frames), "--intrinsics",
        p(&d.join("intrinsics.csv")), "--out", p(&d.join("r.jsonl")),
    ]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("no frames"), "{}", r.stderr);
}

#[test]
fn localize_rejects_bad_settings() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &[]);
    let cfg = d.join("loss.cfg");
    std::fs::write(&cfg, "delta = 2\nspacings = 1, 4\n").unwrap();
    let r = semloc(&[
        "localize", "--map", p(&d.join("edges.ply")), "--frames", p(&d.join("frames.csv")), "--intrinsics",
        p(&d.join("intrinsics.csv")), "--config", p(&cfg), "--out", p(&d.join("r.jsonl")),
    ]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("decreasing"), "{}", r.stderr);
}

#[test]
fn eval_rejects_mismatched_ids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &[]);
    let results = d.join("r.jsonl");
    semloc(&[
        "localize", "--map", p(&d.join("edges.ply")), "--frames", p(&d.join("frames.csv")), "--intrinsics",
        p(&d.join("intrinsics.csv")), "--out", p(&results),
    ]);
    let truth = std::fs::read_to_string(d.join("truth.csv")).unwrap().replace("frame_00002", "frame_99999");
    std::fs::write(d.join("bad_truth.csv"), truth).unwrap();
    let r = semloc(&["eval", "--results", p(&results), "--truth", p(&d.join("bad_truth.csv")), "--out-dir", p(&d.join("e"))]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("frame_00002"), "{}", r.stderr);
}

#[test]
fn map_build_names_frame_with_missing_pose() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &["--mapping-spacing", "80"]);
    let views = std::fs::read_to_string(d.join("mapping_views.csv")).unwrap();
    let mut lines: Vec<String> = views.lines().map(String::from).collect();
    // Blank the camera centre of the second view.
    let mut cols: Vec<String> = lines[2].split(',').map(String::from).collect();
    let id = cols[0].clone();
    cols[2].clear();
    lines[2] = cols.join(",");
    std::fs::write(d.join("bad_views.csv"), lines.join("\n") + "\n").unwrap();
    let r = semloc(&[
        "map-build", "--cloud", p(&d.join("world_colored.ply")), "--views", p(&d.join("bad_views.csv")),
        "--intrinsics", p(&d.join("intrinsics.csv")), "--out", p(&d.join("m.ply")),
    ]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains(&id) && r.stderr.contains(":3"), "{}", r.stderr);
}

#[test]
fn map_prune_reports_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &[]);
    let once = d.join("once.ply");
    let r = semloc(&["map-prune", "--map", p(&d.join("world_labeled.ply")), "--out", p(&once)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let map = io::read_edge_map(&once).unwrap();
    let printed = format!("retained {} of {} voxels (fraction {:.6})", map.len(), map.input_voxels(), map.retained_fraction());
    assert!(r.stdout.contains(&printed), "{} vs {printed}", r.stdout);

    // Pruning the pruned map keeps every voxel.
    let twice = d.join("twice.ply");
    assert_eq!(semloc(&["map-prune", "--map", p(&once), "--out", p(&twice)]).code, EXIT_OK);
    let again = io::read_edge_map(&twice).unwrap();
    // Support counts restart at one member per stored centre; cells and
    // classes must not change.
    let cells = |m: &semloc::semantic_map::VoxelEdgeMap| m.voxels().iter().map(|v| (v.index, v.class)).collect::<Vec<_>>();
    assert_eq!(cells(&again), cells(&map));

    // Single-class input: empty output and a warning.
    let mut cloud = io::read_labeled_cloud(&d.join("world_labeled.ply"), 8).unwrap();
    cloud.points.iter_mut().for_each(|p| p.class = 3);
    io::write_labeled_cloud(&d.join("flat.ply"), &cloud).unwrap();
    let r = semloc(&["map-prune", "--map", p(&d.join("flat.ply")), "--out", p(&d.join("flat_edges.ply"))]);
    assert_eq!(r.code, EXIT_DEGRADED);
    assert!(r.stderr.contains("warning"));
    assert!(io::read_edge_map(&d.join("flat_edges.ply")).unwrap().is_empty());
}

#[test]
fn xmodal_identity_cases() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let pts = [[0.0, 0.0], [100.0, 0.0], [0.0, 80.0], [100.0, 80.0], [37.0, 12.0], [64.0, 71.0]];
    io::write_correspondences(&d.join("c.csv"), &pts.iter().map(|&q| (q, q)).collect::<Vec<_>>()).unwrap();
    let r = semloc(&["xmodal", "fit", "--correspondences", p(&d.join("c.csv")), "--out", p(&d.join("h.csv"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let h = io::read_homography(&d.join("h.csv")).unwrap();
    assert!(h.max_abs_diff(&Homography::identity()) < 1e-12);

    synth_into(d, &[]);
    let m = p(&d.join("masks/frame_00001.png")).to_string();
    let r = semloc(&["xmodal", "confusion", "--pred", &m, "--truth", &m, "--out", p(&d.join("conf.csv"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let c = io::read_confusion(&d.join("conf.csv")).unwrap();
    assert_eq!(c.max_abs_diff(&ConfusionMatrix::identity(8)), 0.0);

    let r = semloc(&["xmodal", "confusion", "--pred", &m, &m, "--truth", &m, "--out", p(&d.join("x.csv"))]);
    assert_eq!(r.code, EXIT_INPUT);
}

#[test]
fn xmodal_warp_round_trip_agrees_in_interior() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_into(d, &[]);
    let src = io::read_mask(&d.join("masks/frame_00004.png"), 8).unwrap();
    let m = nalgebra::Matrix3::new(1.05, 0.04, 3.0, -0.03, 0.97, -2.0, 1e-4, -5e-5, 1.0);
    let h = Homography::new(m).unwrap();
    io::write_homography(&d.join("h.csv"), &h).unwrap();
    io::write_homography(&d.join("hinv.csv"), &h.inverse()).unwrap();
    let warp = |mask: &Path, hf: &Path, out: &Path| {
        semloc(&[
            "xmodal", "warp", "--mask", p(mask), "--homography", p(hf), "--width", "64", "--height", "64", "--out", p(out),
        ])
    };
    assert_eq!(warp(&d.join("masks/frame_00004.png"), &d.join("h.csv"), &d.join("w.png")).code, EXIT_OK);
    assert_eq!(warp(&d.join("w.png"), &d.join("hinv.csv"), &d.join("back.png")).code, EXIT_OK);
    let back: SegmentationMask = io::read_mask(&d.join("back.png"), 8).unwrap();
    // The CLI agrees with the library call.
    assert_eq!(io::read_mask(&d.join("w.png"), 8).unwrap(), warp_mask(&src, &h, (64, 64)));
    let (mut same, mut total) = (0, 0);
    for y in 12..52 {
        for x in 12..52 {
            total += 1;
            same += (back.get(x, y) == src.get(x, y)) as usize;
        }
    }
    assert!(same as f64 >= 0.95 * total as f64, "{same}/{total}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(semloc(&["localize"]).code, EXIT_INPUT);
    assert_eq!(semloc(&["no-such-command"]).code, EXIT_INPUT);
    let h = semloc(&["--help"]);
    assert_eq!(h.code, EXIT_OK);
    assert!(h.stdout.contains("map-build"));
    let r = semloc(&["synth", "--out", "/nonexistent_dir_for_test/x", "--set", "frames=oops"]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("frames"), "{}", r.stderr);
}
