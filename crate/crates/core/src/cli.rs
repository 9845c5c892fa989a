//! Command-line front end. Exit codes: 0 success, 1 completed with gated or
//! degraded output, 2 input error.

use crate::alignment::LossConfig;
use crate::classes::DEFAULT_NUM_CLASSES;
use crate::config::{apply_file, apply_overrides, LocalizeSettings, Settings, SynthSettings};
use crate::crossmodal::{estimate_confusion, fit_homography, warp_mask};
use crate::evaluation::{bin_by_edges, dataset_summary, gate_sweep, parse_threshold, FrameError};
use crate::geometry::{CameraIntrinsics, PlanarTranslation, ViewGeometry};
use crate::io::{self, FrameResult, RunManifest, TruthRow, ViewRecord};
use crate::mask::SegmentationMask;
use crate::semantic_map::{fuse_labels, voxelize_and_prune, LabeledView, DEFAULT_VOXEL_SIZE};
use crate::solver::localize_trajectory;
use crate::synth::{colorize, corrupt_mask, generate_scene, mapping_views, sample_frames};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEGRADED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "semloc", version, about = "Semantic map-relative localization of aerial imagery")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label a coloured cloud by majority vote over segmented views.
    MapBuild(MapBuildArgs),
    /// Keep only class-transition voxels of a labelled map.
    MapPrune(MapPruneArgs),
    /// Estimate the planar offset of every frame against an edge map.
    Localize(LocalizeArgs),
    /// Accuracy tables and plots from localization results.
    Eval(EvalArgs),
    /// Generate a synthetic world, frames and ground truth.
    Synth(SynthArgs),
    /// Cross-modal supervision tools.
    #[command(subcommand)]
    Xmodal(XmodalCommand),
}

#[derive(Debug, Args)]
pub struct MapBuildArgs {
    /// Coloured point cloud (PLY).
    #[arg(long)]
    pub cloud: PathBuf,
    /// Views manifest (CSV); image paths are relative to it.
    #[arg(long)]
    pub views: PathBuf,
    #[arg(long)]
    pub intrinsics: PathBuf,
    #[arg(long, default_value_t = DEFAULT_NUM_CLASSES)]
    pub classes: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MapPruneArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value_t = DEFAULT_VOXEL_SIZE)]
    pub voxel_size: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    /// Pruned edge map (PLY written by map-prune).
    #[arg(long)]
    pub map: PathBuf,
    /// Frames manifest (CSV); image paths are relative to it.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub intrinsics: PathBuf,
    /// Loss and search settings (`key = value`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Setting override `key=value`, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Confusion matrix CSV enabling confusion-marginalized matching.
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    /// Results JSONL.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// CSV with `frame_id,tx,ty[,dataset]`.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Evidence gate thresholds (edge pixels), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,8000")]
    pub gate: Vec<String>,
    #[arg(long, default_value_t = 5500.0)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 1749.0)]
    pub bin_origin: f64,
    /// Report raw errors instead of removing the mean error vector.
    #[arg(long)]
    pub no_bias_correct: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene, sampling and corruption settings (`key = value`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Also write nadir survey views on a grid of this spacing (m) for
    /// map-build.
    #[arg(long)]
    pub mapping_spacing: Option<f64>,
    /// Voxel size of the pruned edge map written alongside.
    #[arg(long, default_value_t = DEFAULT_VOXEL_SIZE)]
    pub voxel_size: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum XmodalCommand {
    /// Fit a homography to point correspondences.
    Fit {
        #[arg(long)]
        correspondences: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transfer a label mask through a homography.
    Warp {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        homography: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = DEFAULT_NUM_CLASSES)]
        classes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Confusion matrix between predicted and reference masks.
    Confusion {
        #[arg(long, num_args = 1.., required = true)]
        pred: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        truth: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NUM_CLASSES)]
        classes: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure of a command; every variant maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<i32, InputError>;

fn fail<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let result = pool.install(|| dispatch(cli.command, argv, out, err));
    match result {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, argv: Vec<String>, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CmdResult {
    match cmd {
        Command::MapBuild(a) => map_build(a, argv, out),
        Command::MapPrune(a) => map_prune(a, argv, out, err),
        Command::Localize(a) => localize(a, argv, out, err),
        Command::Eval(a) => eval(a, argv, out, err),
        Command::Synth(a) => synth(a, argv, out),
        Command::Xmodal(x) => xmodal(x, argv, out),
    }
}

/// `<out>.manifest.json` next to the primary output.
pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn load_views(
    views: &Path,
    intrinsics: &Path,
    classes: usize,
) -> Result<Vec<(ViewRecord, SegmentationMask, ViewGeometry)>, InputError> {
    let cams = io::read_intrinsics(intrinsics)?;
    let records = io::read_views(views)?;
    records
        .into_par_iter()
        .map(|r| {
            let view = r.to_view(&cams, views)?;
            let img = io::resolve_relative(views, &r.image);
            let mask = io::read_mask(&img, classes).map_err(|e| format!("frame {}: {e}", r.frame_id))?;
            let k = &view.intrinsics;
            if (mask.width(), mask.height()) != (k.width, k.height) {
                return fail(format!(
                    "{}:{}: frame {}: mask is {}x{} but camera `{}` is {}x{}",
                    views.display(),
                    r.line,
                    r.frame_id,
                    mask.width(),
                    mask.height(),
                    r.intrinsics_id,
                    k.width,
                    k.height
                ));
            }
            Ok((r, mask, view))
        })
        .collect()
}

fn map_build(a: MapBuildArgs, argv: Vec<String>, out: &mut (dyn Write + Send)) -> CmdResult {
    let mut m = RunManifest::start("map-build", argv);
    let cloud = io::read_colored_cloud(&a.cloud)?;
    let frames = load_views(&a.views, &a.intrinsics, a.classes)?;
    let views: Vec<LabeledView> = frames
        .into_iter()
        .map(|(_, mask, view)| LabeledView::at(mask, view, PlanarTranslation::ZERO))
        .collect::<Result<_, _>>()?;
    let map = fuse_labels(&cloud, &views)?;
    io::write_labeled_cloud(&a.out, &map)?;
    for p in [&a.cloud, &a.views, &a.intrinsics] {
        m.input(p)?;
    }
    m.config_pairs(vec![("classes".into(), a.classes.to_string())]);
    m.output(&a.out);
    m.finish(&manifest_path(&a.out))?;
    writeln!(out, "labelled {} of {} points from {} views", map.len(), cloud.len(), views.len())?;
    Ok(EXIT_OK)
}

fn map_prune(a: MapPruneArgs, argv: Vec<String>, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CmdResult {
    let mut m = RunManifest::start("map-prune", argv);
    let map = io::read_labeled_cloud(&a.map, DEFAULT_NUM_CLASSES)?;
    let edges = voxelize_and_prune(&map, a.voxel_size)?;
    io::write_edge_map(&a.out, &edges)?;
    m.input(&a.map)?;
    m.config_pairs(vec![("voxel_size".into(), a.voxel_size.to_string())]);
    m.output(&a.out);
    m.finish(&manifest_path(&a.out))?;
    writeln!(
        out,
        "retained {} of {} voxels (fraction {:.6})",
        edges.len(),
        edges.input_voxels(),
        edges.retained_fraction()
    )?;
    if edges.is_empty() {
        writeln!(err, "warning: no class transitions; the edge map is empty")?;
        return Ok(EXIT_DEGRADED);
    }
    Ok(EXIT_OK)
}

fn localize(a: LocalizeArgs, argv: Vec<String>, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CmdResult {
    let mut m = RunManifest::start("localize", argv);
    let mut settings = LocalizeSettings::default();
    if let Some(c) = &a.config {
        apply_file(&mut settings, c)?;
        m.input(c)?;
    }
    apply_overrides(&mut settings, &a.overrides)?;
    let confusion_path = a.confusion.clone().or_else(|| {
        let base = a.config.clone().unwrap_or_default();
        settings.confusion_path.as_deref().map(|p| io::resolve_relative(&base, p))
    });
    let mut loss: LossConfig = settings.loss.clone();
    if let Some(p) = &confusion_path {
        loss.confusion = Some(io::read_confusion(p)?);
        m.input(p)?;
        settings.confusion_path = Some(p.display().to_string());
    }
    loss.validate()?;
    settings.search.validate()?;
    let map = io::read_edge_map(&a.map)?;
    if map.is_empty() {
        return fail(format!("{}: edge map is empty", a.map.display()));
    }
    let frames = load_views(&a.frames, &a.intrinsics, map.num_classes())?;
    if frames.is_empty() {
        return fail(format!("{}: no frames", a.frames.display()));
    }
    if let Some(c) = &loss.confusion {
        if c.num_classes() != map.num_classes() {
            return fail(format!("confusion has {} classes, map has {}", c.num_classes(), map.num_classes()));
        }
    }
    for p in [&a.map, &a.frames, &a.intrinsics] {
        m.input(p)?;
    }
    m.config_pairs(settings.dump());

    // Parallel within a chunk; a single writer appends results in order.
    const CHUNK: usize = 64;
    let file = std::fs::File::create(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    let mut w = std::io::BufWriter::new(file);
    let (mut gated, mut failed) = (0usize, 0usize);
    for chunk in frames.chunks(CHUNK) {
        let pairs: Vec<(SegmentationMask, ViewGeometry)> = chunk.iter().map(|(_, mk, v)| (mk.clone(), *v)).collect();
        let results = localize_trajectory(&map, &pairs, &loss, &settings.search);
        for ((rec, _, _), r) in chunk.iter().zip(results) {
            let row = match r {
                Ok(res) => {
                    gated += res.gated as usize;
                    FrameResult { frame_id: rec.frame_id.clone(), result: Some(res), error: None }
                }
                Err(e) => {
                    failed += 1;
                    writeln!(err, "frame {}: {e}", rec.frame_id)?;
                    FrameResult { frame_id: rec.frame_id.clone(), result: None, error: Some(e.to_string()) }
                }
            };
            writeln!(w, "{}", serde_json::to_string(&row)?)?;
        }
        w.flush()?;
    }
    m.output(&a.out);
    m.finish(&manifest_path(&a.out))?;
    writeln!(out, "localized {} frames: {} gated, {} failed", frames.len(), gated, failed)?;
    Ok(if gated + failed > 0 { EXIT_DEGRADED } else { EXIT_OK })
}

fn eval(a: EvalArgs, argv: Vec<String>, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CmdResult {
    let mut m = RunManifest::start("eval", argv);
    let results = io::read_results(&a.results)?;
    let truth = io::read_truth(&a.truth)?;
    let thresholds: Vec<usize> = a.gate.iter().map(|s| parse_threshold(s)).collect::<Result<_, _>>()?;
    let by_id: HashMap<&str, &TruthRow> = truth.iter().map(|t| (t.frame_id.as_str(), t)).collect();
    if by_id.len() != truth.len() {
        return fail(format!("{}: duplicate frame ids", a.truth.display()));
    }
    let mut seen = std::collections::HashSet::new();
    let mut errors = Vec::new();
    let mut failed = 0;
    for r in &results {
        let Some(t) = by_id.get(r.frame_id.as_str()) else {
            return fail(format!("frame {} has a result but no truth row", r.frame_id));
        };
        if !seen.insert(r.frame_id.as_str()) {
            return fail(format!("frame {} appears twice in the results", r.frame_id));
        }
        match &r.result {
            Some(res) => {
                let mut fe = FrameError::new(&r.frame_id, res.t_star, t.t, res.edge_count, res.gated)?;
                fe.dataset = t.dataset.clone();
                errors.push(fe);
            }
            None => failed += 1,
        }
    }
    if let Some(t) = truth.iter().find(|t| !seen.contains(t.frame_id.as_str())) {
        return fail(format!("frame {} has a truth row but no result", t.frame_id));
    }
    if errors.is_empty() {
        return fail("no localized frames to evaluate");
    }
    let bias = !a.no_bias_correct;
    let dir = &a.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let summary = dataset_summary(&errors, bias)?;
    io::write_summary_csv(&dir.join("summary.csv"), &summary)?;
    io::write_bins_csv(&dir.join("edge_bins.csv"), &bin_by_edges(&errors, a.bin_width, a.bin_origin, bias)?)?;
    let gates = gate_sweep(&errors, &thresholds, bias)?;
    io::write_gate_csv(&dir.join("gate_sweep.csv"), &gates)?;
    io::write_frame_errors(&dir.join("frame_errors.jsonl"), &errors)?;
    io::write_scatter_svg(&dir.join("error_vs_edges.svg"), &errors)?;
    io::write_trajectory_svg(&dir.join("trajectory.svg"), &errors)?;
    m.input(&a.results)?;
    m.input(&a.truth)?;
    m.config_pairs(vec![
        ("bias_correct".into(), bias.to_string()),
        ("gate".into(), a.gate.join(",")),
        ("bin_width".into(), a.bin_width.to_string()),
        ("bin_origin".into(), a.bin_origin.to_string()),
    ]);
    for f in ["summary.csv", "edge_bins.csv", "gate_sweep.csv", "frame_errors.jsonl", "error_vs_edges.svg", "trajectory.svg"] {
        m.output(&dir.join(f));
    }
    m.finish(&dir.join("manifest.json"))?;
    let total = summary.last().expect("global row");
    writeln!(
        out,
        "N={} RMSE_2D={:.3} m median={:.3} m P75={:.3} m <2m={:.1}% >5m={:.1}%",
        total.metrics.n,
        total.metrics.rmse_2d,
        total.metrics.median_2d,
        total.metrics.p75_2d,
        total.metrics.pct_under_2m,
        total.metrics.pct_over_5m
    )?;
    for g in &gates {
        match &g.metrics {
            Some(mm) => writeln!(out, "gate {}: kept {:.1}% RMSE_2D={:.3} m", g.threshold, 100.0 * g.retained_fraction, mm.rmse_2d)?,
            None => writeln!(out, "gate {}: no frames retained", g.threshold)?,
        }
    }
    if failed > 0 {
        writeln!(err, "warning: {failed} frames have no estimate and were left out")?;
        return Ok(EXIT_DEGRADED);
    }
    Ok(EXIT_OK)
}

fn synth(a: SynthArgs, argv: Vec<String>, out: &mut (dyn Write + Send)) -> CmdResult {
    let mut m = RunManifest::start("synth", argv);
    let mut s = SynthSettings::default();
    if let Some(c) = &a.config {
        apply_file(&mut s, c)?;
        m.input(c)?;
    }
    apply_overrides(&mut s, &a.overrides)?;
    if let Some(p) = &s.confusion_path {
        let base = a.config.clone().unwrap_or_default();
        let path = io::resolve_relative(&base, p);
        s.corruption.confusion = Some(io::read_confusion(&path)?);
        m.input(&path)?;
    }
    s.corruption.validate()?;
    let scene = generate_scene(&s.scene)?;
    let dir = &a.out;
    std::fs::create_dir_all(dir.join("masks")).map_err(|e| format!("{}: {e}", dir.display()))?;

    io::write_colored_cloud(&dir.join("world_colored.ply"), &colorize(&scene.cloud))?;
    io::write_labeled_cloud(&dir.join("world_labeled.ply"), &scene.cloud)?;
    let edges = voxelize_and_prune(&scene.cloud, a.voxel_size)?;
    io::write_edge_map(&dir.join("edges.ply"), &edges)?;
    let cams: BTreeMap<String, CameraIntrinsics> = [("cam0".to_string(), s.scene.intrinsics()?)].into();
    io::write_intrinsics(&dir.join("intrinsics.csv"), &cams)?;

    let frames = sample_frames(&scene, &s.sampling);
    let observed: Vec<SegmentationMask> = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| corrupt_mask(&f.truth, &s.corruption, s.noise_seed.wrapping_add(i as u64)))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::with_capacity(frames.len());
    let mut truth = Vec::with_capacity(frames.len());
    for (f, mask) in frames.iter().zip(&observed) {
        let image = format!("masks/{}.png", f.id);
        io::write_mask(&dir.join(&image), mask)?;
        records.push(ViewRecord::from_view(&f.id, &image, &f.view, "cam0"));
        truth.push(TruthRow { frame_id: f.id.clone(), t: f.t_true, dataset: None });
    }
    io::write_views(&dir.join("frames.csv"), &records)?;
    io::write_truth(&dir.join("truth.csv"), &truth)?;

    if let Some(spacing) = a.mapping_spacing {
        if !(spacing > 0.0) {
            return fail(format!("mapping spacing must be positive, got {spacing}"));
        }
        let views = mapping_views(&scene, spacing);
        std::fs::create_dir_all(dir.join("mapping")).map_err(|e| e.to_string())?;
        let mut recs = Vec::with_capacity(views.len());
        for (i, v) in views.iter().enumerate() {
            let id = format!("survey_{i:05}");
            let image = format!("mapping/{id}.png");
            io::write_mask(&dir.join(&image), &v.mask)?;
            recs.push(ViewRecord::from_view(&id, &image, &v.view, "cam0"));
        }
        io::write_views(&dir.join("mapping_views.csv"), &recs)?;
    }

    std::fs::write(dir.join("settings.cfg"), s.to_text()).map_err(|e| e.to_string())?;
    m.config_pairs(s.dump());
    m.config_pairs(vec![("voxel_size".into(), a.voxel_size.to_string())]);
    for f in ["world_colored.ply", "world_labeled.ply", "edges.ply", "intrinsics.csv", "frames.csv", "truth.csv", "settings.cfg"] {
        m.output(&dir.join(f));
    }
    m.finish(&dir.join("manifest.json"))?;
    writeln!(
        out,
        "world: {} points, edge map: {} voxels, frames: {}",
        scene.cloud.len(),
        edges.len(),
        frames.len()
    )?;
    Ok(EXIT_OK)
}

fn xmodal(cmd: XmodalCommand, argv: Vec<String>, out: &mut (dyn Write + Send)) -> CmdResult {
    match cmd {
        XmodalCommand::Fit { correspondences, out: path } => {
            let mut m = RunManifest::start("xmodal fit", argv);
            let corr = io::read_correspondences(&correspondences)?;
            let fit = fit_homography(&corr)?;
            io::write_homography(&path, &fit.homography)?;
            m.input(&correspondences)?;
            m.output(&path);
            m.finish(&manifest_path(&path))?;
            writeln!(out, "fitted {} correspondences, RMS reprojection {:.3e} px", corr.len(), fit.rms)?;
        }
        XmodalCommand::Warp { mask, homography, width, height, classes, out: path } => {
            let mut m = RunManifest::start("xmodal warp", argv);
            if width == 0 || height == 0 {
                return fail("output size must be positive");
            }
            let src = io::read_mask(&mask, classes)?;
            let h = io::read_homography(&homography)?;
            let warped = warp_mask(&src, &h, (width, height));
            io::write_mask(&path, &warped)?;
            m.input(&mask)?;
            m.input(&homography)?;
            m.output(&path);
            m.finish(&manifest_path(&path))?;
            writeln!(out, "warped to {width}x{height}, {} labelled pixels", warped.valid_pixels())?;
        }
        XmodalCommand::Confusion { pred, truth, classes, out: path } => {
            let mut m = RunManifest::start("xmodal confusion", argv);
            if pred.len() != truth.len() {
                return fail(format!("{} predicted masks but {} reference masks", pred.len(), truth.len()));
            }
            let p: Vec<SegmentationMask> = pred.iter().map(|f| io::read_mask(f, classes)).collect::<Result<_, _>>()?;
            let t: Vec<SegmentationMask> = truth.iter().map(|f| io::read_mask(f, classes)).collect::<Result<_, _>>()?;
            let c = estimate_confusion(&p, &t)?;
            io::write_confusion(&path, &c)?;
            for f in pred.iter().chain(&truth) {
                m.input(f)?;
            }
            m.output(&path);
            m.finish(&manifest_path(&path))?;
            writeln!(out, "confusion over {} mask pairs written", p.len())?;
        }
    }
    Ok(EXIT_OK)
}
