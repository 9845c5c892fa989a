//! CSV tables: views, intrinsics, correspondences, confusion matrices,
//! homographies and per-frame truth.

use super::FormatError;
use crate::classes::class_name;
use crate::crossmodal::{ConfusionMatrix, CorrespondenceSet, Homography};
use crate::geometry::{CameraIntrinsics, Distortion, PlanarTranslation, RigidPose, ViewGeometry};
use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use nalgebra::Matrix3;
use std::collections::BTreeMap;
use std::path::Path;

/// Parsed rows with their 1-based line numbers, after checking the header.
fn read_table(path: &Path, required: &[&str]) -> Result<(StringRecord, Vec<(usize, StringRecord)>), FormatError> {
    let mut r = ReaderBuilder::new()
        .trim(Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => FormatError::io(path, io),
            other => FormatError::invalid(path, format!("{other:?}")),
        })?;
    let header = r
        .headers()
        .map_err(|e| FormatError::parse(path, 1, e.to_string()))?
        .clone();
    for name in required {
        if !header.iter().any(|h| h == *name) {
            return Err(FormatError::parse(path, 1, format!("missing column `{name}`")));
        }
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            FormatError::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec));
    }
    Ok((header, rows))
}

struct Row<'a> {
    path: &'a Path,
    header: &'a StringRecord,
    rec: &'a StringRecord,
    line: usize,
    /// Prefix naming the entity the row describes.
    what: String,
}

impl Row<'_> {
    fn raw(&self, name: &str) -> Option<&str> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rec.get(i).filter(|v| !v.is_empty())
    }

    fn text(&self, name: &str) -> Result<String, FormatError> {
        self.raw(name)
            .map(str::to_string)
            .ok_or_else(|| FormatError::parse(self.path, self.line, format!("{}missing `{name}`", self.what)))
    }

    fn num<T: std::str::FromStr>(&self, name: &str) -> Result<T, FormatError> {
        let v = self.text(name)?;
        v.parse()
            .map_err(|_| FormatError::parse(self.path, self.line, format!("{}bad `{name}` value `{v}`", self.what)))
    }

    fn num_or<T: std::str::FromStr>(&self, name: &str, default: T) -> Result<T, FormatError> {
        match self.raw(name) {
            None => Ok(default),
            Some(_) => self.num(name),
        }
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FormatError::io(path, e))?;
    }
    WriterBuilder::new().from_path(path).map_err(|e| FormatError::invalid(path, e.to_string()))
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), FormatError> {
    let mut w = writer(path)?;
    let err = |e: csv::Error| FormatError::invalid(path, e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush().map_err(|e| FormatError::io(path, e))
}

const INTRINSICS_COLS: [&str; 12] = ["id", "fx", "fy", "cx", "cy", "width", "height", "k1", "k2", "k3", "p1", "p2"];

/// Camera models by id. Distortion columns may be omitted (zero).
pub fn read_intrinsics(path: &Path) -> Result<BTreeMap<String, CameraIntrinsics>, FormatError> {
    let (header, rows) = read_table(path, &INTRINSICS_COLS[..7])?;
    let mut out = BTreeMap::new();
    for (line, rec) in &rows {
        let mut row = Row { path, header: &header, rec, line: *line, what: String::new() };
        let id = row.text("id")?;
        row.what = format!("camera {id}: ");
        let dist = Distortion {
            k1: row.num_or("k1", 0.0)?,
            k2: row.num_or("k2", 0.0)?,
            k3: row.num_or("k3", 0.0)?,
            p1: row.num_or("p1", 0.0)?,
            p2: row.num_or("p2", 0.0)?,
        };
        let k = CameraIntrinsics::new(
            row.num("fx")?,
            row.num("fy")?,
            row.num("cx")?,
            row.num("cy")?,
            row.num("width")?,
            row.num("height")?,
            dist,
        )
        .map_err(|e| FormatError::parse(path, *line, format!("camera {id}: {e}")))?;
        if out.insert(id.clone(), k).is_some() {
            return Err(FormatError::parse(path, *line, format!("duplicate camera id `{id}`")));
        }
    }
    Ok(out)
}

pub fn write_intrinsics(path: &Path, cams: &BTreeMap<String, CameraIntrinsics>) -> Result<(), FormatError> {
    let header: Vec<String> = INTRINSICS_COLS.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = cams
        .iter()
        .map(|(id, k)| {
            let d = k.dist;
            vec![
                id.clone(),
                k.fx.to_string(),
                k.fy.to_string(),
                k.cx.to_string(),
                k.cy.to_string(),
                k.width.to_string(),
                k.height.to_string(),
                d.k1.to_string(),
                d.k2.to_string(),
                d.k3.to_string(),
                d.p1.to_string(),
                d.p2.to_string(),
            ]
        })
        .collect();
    write_rows(path, &header, &rows)
}

/// One row of a views manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRecord {
    pub frame_id: String,
    /// Mask path as written (relative to the manifest's directory).
    pub image: String,
    /// Camera centre; `(cx, cy)` is the horizontal navigation estimate.
    pub center: [f64; 3],
    /// Camera-to-world rotation.
    pub rotation: Matrix3<f64>,
    /// Height above the map datum used for projection (m).
    pub height: f64,
    pub intrinsics_id: String,
    pub line: usize,
}

const VIEW_COLS: [&str; 16] = [
    "frame_id", "image", "cx", "cy", "cz", "r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22", "height",
    "intrinsics_id",
];

impl ViewRecord {
    pub fn from_view(frame_id: &str, image: &str, view: &ViewGeometry, intrinsics_id: &str) -> Self {
        let c = view.camera_center(PlanarTranslation::ZERO);
        Self {
            frame_id: frame_id.into(),
            image: image.into(),
            center: [c.x, c.y, c.z],
            rotation: view.rotation_wc(),
            height: view.height,
            intrinsics_id: intrinsics_id.into(),
            line: 0,
        }
    }

    /// Camera geometry with the centre's horizontal position as prior.
    pub fn to_view(&self, cams: &BTreeMap<String, CameraIntrinsics>, path: &Path) -> Result<ViewGeometry, FormatError> {
        let intr = cams.get(&self.intrinsics_id).ok_or_else(|| {
            FormatError::parse(
                path,
                self.line,
                format!("frame {}: unknown intrinsics id `{}`", self.frame_id, self.intrinsics_id),
            )
        })?;
        ViewGeometry::new(
            self.rotation,
            RigidPose::identity(),
            self.height,
            *intr,
            PlanarTranslation::new(self.center[0], self.center[1]),
        )
        .map_err(|e| FormatError::parse(path, self.line, format!("frame {}: {e}", self.frame_id)))
    }
}

pub fn read_views(path: &Path) -> Result<Vec<ViewRecord>, FormatError> {
    let (header, rows) = read_table(path, &VIEW_COLS[..2])?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let mut row = Row { path, header: &header, rec, line: *line, what: String::new() };
        let frame_id = row.text("frame_id")?;
        row.what = format!("frame {frame_id}: ");
        let mut r = [0.0; 9];
        for (i, v) in r.iter_mut().enumerate() {
            *v = row.num(VIEW_COLS[5 + i])?;
        }
        let center = [row.num("cx")?, row.num("cy")?, row.num("cz")?];
        out.push(ViewRecord {
            image: row.text("image")?,
            center,
            rotation: Matrix3::from_row_slice(&r),
            height: row.num_or("height", center[2])?,
            intrinsics_id: row.text("intrinsics_id")?,
            frame_id,
            line: *line,
        });
    }
    Ok(out)
}

pub fn write_views(path: &Path, views: &[ViewRecord]) -> Result<(), FormatError> {
    let header: Vec<String> = VIEW_COLS.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = views
        .iter()
        .map(|v| {
            let mut r = vec![v.frame_id.clone(), v.image.clone()];
            r.extend(v.center.iter().map(f64::to_string));
            for i in 0..3 {
                for j in 0..3 {
                    r.push(v.rotation[(i, j)].to_string());
                }
            }
            r.push(v.height.to_string());
            r.push(v.intrinsics_id.clone());
            r
        })
        .collect();
    write_rows(path, &header, &rows)
}

pub fn read_correspondences(path: &Path) -> Result<CorrespondenceSet, FormatError> {
    let cols = ["u_src", "v_src", "u_dst", "v_dst"];
    let (header, rows) = read_table(path, &cols)?;
    let mut pairs = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let row = Row { path, header: &header, rec, line: *line, what: String::new() };
        pairs.push(([row.num("u_src")?, row.num("v_src")?], [row.num("u_dst")?, row.num("v_dst")?]));
    }
    CorrespondenceSet::new(pairs).map_err(|e| FormatError::invalid(path, e.to_string()))
}

pub fn write_correspondences(path: &Path, pairs: &[([f64; 2], [f64; 2])]) -> Result<(), FormatError> {
    let header = ["u_src", "v_src", "u_dst", "v_dst"].map(String::from);
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|(s, d)| vec![s[0].to_string(), s[1].to_string(), d[0].to_string(), d[1].to_string()])
        .collect();
    write_rows(path, &header, &rows)
}

/// Confusion matrix with a header of predicted-class names; the first
/// column names the true class.
pub fn write_confusion(path: &Path, c: &ConfusionMatrix) -> Result<(), FormatError> {
    let k = c.num_classes();
    let mut header = vec!["true_class".to_string()];
    header.extend((0..k).map(|j| class_name(j as u8, k)));
    let rows: Vec<Vec<String>> = (0..k)
        .map(|y| {
            let mut r = vec![class_name(y as u8, k)];
            r.extend(c.row(y).iter().map(f64::to_string));
            r
        })
        .collect();
    write_rows(path, &header, &rows)
}

pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix, FormatError> {
    let (header, rows) = read_table(path, &["true_class"])?;
    let k = header.len() - 1;
    if rows.len() != k {
        return Err(FormatError::invalid(path, format!("{k} predicted columns but {} rows", rows.len())));
    }
    let mut m = Vec::with_capacity(k);
    for (line, rec) in &rows {
        if rec.len() != k + 1 {
            return Err(FormatError::parse(path, *line, format!("expected {} fields, got {}", k + 1, rec.len())));
        }
        let vals: Result<Vec<f64>, _> = rec.iter().skip(1).map(str::parse::<f64>).collect();
        m.push(vals.map_err(|_| FormatError::parse(path, *line, "non-numeric probability"))?);
    }
    ConfusionMatrix::new(m).map_err(|e| FormatError::invalid(path, e.to_string()))
}

/// Homography as three rows of three numbers (`h0,h1,h2`).
pub fn write_homography(path: &Path, h: &Homography) -> Result<(), FormatError> {
    let header = ["h0", "h1", "h2"].map(String::from);
    let m = h.matrix();
    let rows: Vec<Vec<String>> = (0..3).map(|i| (0..3).map(|j| m[(i, j)].to_string()).collect()).collect();
    write_rows(path, &header, &rows)
}

pub fn read_homography(path: &Path) -> Result<Homography, FormatError> {
    let (header, rows) = read_table(path, &["h0", "h1", "h2"])?;
    if rows.len() != 3 {
        return Err(FormatError::invalid(path, format!("expected 3 rows, got {}", rows.len())));
    }
    let mut m = [0.0; 9];
    for (i, (line, rec)) in rows.iter().enumerate() {
        let row = Row { path, header: &header, rec, line: *line, what: String::new() };
        for j in 0..3 {
            m[i * 3 + j] = row.num(&format!("h{j}"))?;
        }
    }
    Homography::new(Matrix3::from_row_slice(&m)).map_err(|e| FormatError::invalid(path, e.to_string()))
}

/// True offset of a frame from its navigation prior.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub frame_id: String,
    pub t: PlanarTranslation,
    pub dataset: Option<String>,
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthRow>, FormatError> {
    let (header, rows) = read_table(path, &["frame_id", "tx", "ty"])?;
    rows.iter()
        .map(|(line, rec)| {
            let mut row = Row { path, header: &header, rec, line: *line, what: String::new() };
            let frame_id = row.text("frame_id")?;
            row.what = format!("frame {frame_id}: ");
            Ok(TruthRow {
                t: PlanarTranslation::new(row.num("tx")?, row.num("ty")?),
                dataset: row.raw("dataset").map(str::to_string),
                frame_id,
            })
        })
        .collect()
}

pub fn write_truth(path: &Path, rows: &[TruthRow]) -> Result<(), FormatError> {
    let with_dataset = rows.iter().any(|r| r.dataset.is_some());
    let mut header = vec!["frame_id".to_string(), "tx".into(), "ty".into()];
    if with_dataset {
        header.push("dataset".into());
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.frame_id.clone(), r.t.tx.to_string(), r.t.ty.to_string()];
            if with_dataset {
                v.push(r.dataset.clone().unwrap_or_default());
            }
            v
        })
        .collect();
    write_rows(path, &header, &body)
}
