//! Plain-text `key = value` configuration with `#` comments and
//! command-line `key=value` overrides.

use crate::alignment::{LossConfig, ReverseWeighting};
use crate::solver::SearchConfig;
use crate::synth::{CorruptionSpec, FrameSampling, SceneSpec};
use std::fmt::Display;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {msg}")]
    Syntax { source_name: String, line: usize, msg: String },
    #[error("{source_name}:{line}: unknown key `{key}`")]
    UnknownKey { source_name: String, line: usize, key: String },
    #[error("{source_name}:{line}: bad value for `{key}`: {msg}")]
    Value { source_name: String, line: usize, key: String, msg: String },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
}

/// A configuration struct settable key by key.
pub trait Settings {
    /// `Ok(false)` for an unknown key.
    fn set(&mut self, key: &str, value: &str) -> Result<bool, String>;
    /// Current values, in a stable order, as `key = value` pairs.
    fn dump(&self) -> Vec<(String, String)>;

    fn to_text(&self) -> String {
        self.dump().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `(line number, key, value)` triples of a `key = value` document.
pub fn parse_pairs(text: &str, source_name: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                source_name: source_name.into(),
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { source_name: source_name.into(), line: i + 1, msg: "empty key".into() });
        }
        out.push((i + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn apply_pairs<S: Settings>(s: &mut S, pairs: Vec<(usize, String, String)>, source_name: &str) -> Result<(), ConfigError> {
    for (line, key, value) in pairs {
        match s.set(&key, &value) {
            Ok(true) => {}
            Ok(false) => return Err(ConfigError::UnknownKey { source_name: source_name.into(), line, key }),
            Err(msg) => return Err(ConfigError::Value { source_name: source_name.into(), line, key, msg }),
        }
    }
    Ok(())
}

pub fn apply_text<S: Settings>(s: &mut S, text: &str, source_name: &str) -> Result<(), ConfigError> {
    apply_pairs(s, parse_pairs(text, source_name)?, source_name)
}

pub fn apply_file<S: Settings>(s: &mut S, path: &Path) -> Result<(), ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(name.clone(), e))?;
    apply_text(s, &text, &name)
}

/// Apply `--set key=value` overrides; the line number is the override's
/// position (1-based).
pub fn apply_overrides<S: Settings>(s: &mut S, overrides: &[String]) -> Result<(), ConfigError> {
    let text = overrides.join("\n");
    apply_text(s, &text, "--set")
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|p| num::<f64>(p.trim())).collect()
}

fn pair(v: &str) -> Result<[f64; 2], String> {
    match list(v)?.as_slice() {
        [a] => Ok([*a, *a]),
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("expected `min, max`, got `{v}`")),
    }
}

fn flag(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true/false, got `{v}`")),
    }
}

fn show_list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

/// Loss and search parameters for localization. The confusion matrix is
/// referenced by path and loaded by the caller.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalizeSettings {
    pub loss: LossConfig,
    pub search: SearchConfig,
    pub confusion_path: Option<String>,
}

impl Settings for LocalizeSettings {
    fn set(&mut self, key: &str, v: &str) -> Result<bool, String> {
        match key {
            "delta" => self.loss.delta = num(v)?,
            "d_max" => self.loss.d_max = num(v)?,
            "lambda_f" => self.loss.lambda_f = num(v)?,
            "lambda_r" => self.loss.lambda_r = num(v)?,
            "reverse_weighting" => {
                self.loss.reverse_weighting = match v {
                    "posterior" => ReverseWeighting::Posterior,
                    "row" => ReverseWeighting::Row,
                    _ => return Err(format!("expected posterior or row, got `{v}`")),
                }
            }
            "confusion" => self.confusion_path = (!v.is_empty() && v != "none").then(|| v.to_string()),
            "radius" => self.search.radius = num(v)?,
            "spacings" => self.search.spacings = list(v)?,
            "refine_half_width" => self.search.refine_half_width = num(v)?,
            "gate_threshold" => self.search.gate_threshold = num(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn dump(&self) -> Vec<(String, String)> {
        let rw = match self.loss.reverse_weighting {
            ReverseWeighting::Posterior => "posterior",
            ReverseWeighting::Row => "row",
        };
        vec![
            ("delta".into(), self.loss.delta.to_string()),
            ("d_max".into(), self.loss.d_max.to_string()),
            ("lambda_f".into(), self.loss.lambda_f.to_string()),
            ("lambda_r".into(), self.loss.lambda_r.to_string()),
            ("reverse_weighting".into(), rw.into()),
            ("confusion".into(), self.confusion_path.clone().unwrap_or_else(|| "none".into())),
            ("radius".into(), self.search.radius.to_string()),
            ("spacings".into(), show_list(&self.search.spacings)),
            ("refine_half_width".into(), self.search.refine_half_width.to_string()),
            ("gate_threshold".into(), self.search.gate_threshold.to_string()),
        ]
    }
}

/// Scene, frame sampling and corruption parameters for synthetic data.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub scene: SceneSpec,
    pub sampling: FrameSampling,
    pub corruption: CorruptionSpec,
    /// Seed of the corruption draws.
    pub noise_seed: u64,
    pub confusion_path: Option<String>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            scene: SceneSpec::default(),
            sampling: FrameSampling::default(),
            corruption: CorruptionSpec::default(),
            noise_seed: 0,
            confusion_path: None,
        }
    }
}

impl Settings for SynthSettings {
    fn set(&mut self, key: &str, v: &str) -> Result<bool, String> {
        let s = &mut self.scene;
        match key {
            "seed" => s.seed = num(v)?,
            "extent" => s.extent = num(v)?,
            "density" => s.density = num(v)?,
            "num_classes" => s.num_classes = num(v)?,
            "ground_class" => s.ground_class = num(v)?,
            "buildings" => s.buildings = num(v)?,
            "building_coverage" => s.building_coverage = if v == "none" { None } else { Some(num(v)?) },
            "building_size" => s.building_size = pair(v)?,
            "building_height" => s.building_height = pair(v)?,
            "strips" => s.strips = num(v)?,
            "strip_width" => s.strip_width = pair(v)?,
            "strip_length" => s.strip_length = pair(v)?,
            "discs" => s.discs = num(v)?,
            "disc_radius" => s.disc_radius = pair(v)?,
            "snap" => s.snap = num(v)?,
            "walls" => s.walls = flag(v)?,
            "altitude" => s.altitude = pair(v)?,
            "yaw" => s.yaw = pair(v)?,
            "orientation" => s.orientation = pair(v)?,
            "image_width" => s.image_width = num(v)?,
            "image_height" => s.image_height = num(v)?,
            "focal" => s.focal = num(v)?,
            "frames" => self.sampling.count = num(v)?,
            "offset" => self.sampling.offset = num(v)?,
            "prior_step" => self.sampling.prior_step = num(v)?,
            "offset_step" => self.sampling.offset_step = num(v)?,
            "frame_seed" => self.sampling.seed = num(v)?,
            "flip_rate" => self.corruption.flip_rate = num(v)?,
            "flip_block" => self.corruption.flip_block = num(v)?,
            "boundary_jitter" => self.corruption.boundary_jitter = num(v)?,
            "dropout" => self.corruption.dropout = num(v)?,
            "noise_seed" => self.noise_seed = num(v)?,
            "confusion" => self.confusion_path = (!v.is_empty() && v != "none").then(|| v.to_string()),
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn dump(&self) -> Vec<(String, String)> {
        let s = &self.scene;
        let p = |r: [f64; 2]| show_list(&r);
        vec![
            ("seed".into(), s.seed.to_string()),
            ("extent".into(), s.extent.to_string()),
            ("density".into(), s.density.to_string()),
            ("num_classes".into(), s.num_classes.to_string()),
            ("ground_class".into(), s.ground_class.to_string()),
            ("buildings".into(), s.buildings.to_string()),
            ("building_coverage".into(), s.building_coverage.map_or("none".into(), |c| c.to_string())),
            ("building_size".into(), p(s.building_size)),
            ("building_height".into(), p(s.building_height)),
            ("strips".into(), s.strips.to_string()),
            ("strip_width".into(), p(s.strip_width)),
            ("strip_length".into(), p(s.strip_length)),
            ("discs".into(), s.discs.to_string()),
            ("disc_radius".into(), p(s.disc_radius)),
            ("snap".into(), s.snap.to_string()),
            ("walls".into(), s.walls.to_string()),
            ("altitude".into(), p(s.altitude)),
            ("yaw".into(), p(s.yaw)),
            ("orientation".into(), p(s.orientation)),
            ("image_width".into(), s.image_width.to_string()),
            ("image_height".into(), s.image_height.to_string()),
            ("focal".into(), s.focal.to_string()),
            ("frames".into(), self.sampling.count.to_string()),
            ("offset".into(), self.sampling.offset.to_string()),
            ("prior_step".into(), self.sampling.prior_step.to_string()),
            ("offset_step".into(), self.sampling.offset_step.to_string()),
            ("frame_seed".into(), self.sampling.seed.to_string()),
            ("flip_rate".into(), self.corruption.flip_rate.to_string()),
            ("flip_block".into(), self.corruption.flip_block.to_string()),
            ("boundary_jitter".into(), self.corruption.boundary_jitter.to_string()),
            ("dropout".into(), self.corruption.dropout.to_string()),
            ("noise_seed".into(), self.noise_seed.to_string()),
            ("confusion".into(), self.confusion_path.clone().unwrap_or_else(|| "none".into())),
        ]
    }
}
