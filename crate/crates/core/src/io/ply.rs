//! PLY point clouds. Writing is binary little-endian; reading accepts
//! binary little-endian and ASCII bodies with any scalar property types.

use super::FormatError;
use crate::classes::IGNORE;
use crate::cloud::{ColoredPoint, ColoredPointCloud, Datum, SemanticPoint, SemanticPointCloud};
use crate::semantic_map::{voxel_index, EdgeVoxel, VoxelEdgeMap};
use nalgebra::Point3;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

struct Header {
    ascii: bool,
    vertices: usize,
    props: Vec<(String, Scalar)>,
    comments: Vec<String>,
    /// Line number of the first body line (ASCII bodies).
    body_line: usize,
}

fn read_header<R: BufRead>(r: &mut R, path: &Path) -> Result<Header, FormatError> {
    let mut line = String::new();
    let mut n = 0;
    let mut next = |line: &mut String| -> Result<bool, FormatError> {
        line.clear();
        n += 1;
        let got = r.read_line(line).map_err(|e| FormatError::io(path, e))?;
        Ok(got > 0)
    };
    if !next(&mut line)? || line.trim() != "ply" {
        return Err(FormatError::parse(path, 1, "missing `ply` magic"));
    }
    let mut h = Header { ascii: false, vertices: 0, props: Vec::new(), comments: Vec::new(), body_line: 0 };
    let mut format = false;
    let mut in_vertex = false;
    let mut seen_vertex = false;
    let mut lineno = 1;
    loop {
        if !next(&mut line)? {
            return Err(FormatError::parse(path, lineno + 1, "header ends without `end_header`"));
        }
        lineno += 1;
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", _] => format = true,
            ["format", "ascii", _] => {
                format = true;
                h.ascii = true;
            }
            ["format", other, ..] => {
                return Err(FormatError::parse(path, lineno, format!("unsupported format `{other}`")));
            }
            ["comment", rest @ ..] => h.comments.push(rest.join(" ")),
            ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                if *name == "vertex" && !seen_vertex {
                    seen_vertex = true;
                    in_vertex = true;
                    h.vertices = count
                        .parse()
                        .map_err(|_| FormatError::parse(path, lineno, format!("bad vertex count `{count}`")))?;
                } else if seen_vertex {
                    // Elements after the vertices are not read.
                    in_vertex = false;
                } else {
                    return Err(FormatError::parse(path, lineno, format!("element `{name}` before vertices")));
                }
            }
            ["property", "list", ..] => {
                if in_vertex {
                    return Err(FormatError::parse(path, lineno, "list properties on vertices are not supported"));
                }
            }
            ["property", ty, name] => {
                if in_vertex {
                    let s = Scalar::parse(ty)
                        .ok_or_else(|| FormatError::parse(path, lineno, format!("unknown property type `{ty}`")))?;
                    h.props.push((name.to_string(), s));
                }
            }
            _ => return Err(FormatError::parse(path, lineno, format!("unrecognised header line `{}`", line.trim()))),
        }
    }
    if !format {
        return Err(FormatError::invalid(path, "header has no `format` line"));
    }
    h.body_line = lineno + 1;
    Ok(h)
}

/// Vertex rows as `f64` per property.
fn read_rows(path: &Path) -> Result<(Header, Vec<Vec<f64>>), FormatError> {
    let f = std::fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut r = BufReader::new(f);
    let h = read_header(&mut r, path)?;
    let mut rows = Vec::with_capacity(h.vertices);
    if h.ascii {
        let mut lines = r.lines();
        for i in 0..h.vertices {
            let ln = h.body_line + i;
            let text = lines
                .next()
                .ok_or_else(|| FormatError::parse(path, ln, "file ends before the last vertex"))?
                .map_err(|e| FormatError::io(path, e))?;
            let vals: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|_| FormatError::parse(path, ln, "non-numeric vertex value"))?;
            if vals.len() != h.props.len() {
                return Err(FormatError::parse(
                    path,
                    ln,
                    format!("expected {} values, got {}", h.props.len(), vals.len()),
                ));
            }
            rows.push(vals);
        }
    } else {
        let stride: usize = h.props.iter().map(|p| p.1.size()).sum();
        let mut buf = vec![0u8; stride];
        for i in 0..h.vertices {
            r.read_exact(&mut buf)
                .map_err(|_| FormatError::invalid(path, format!("body truncated at vertex {i} of {}", h.vertices)))?;
            let mut off = 0;
            let mut row = Vec::with_capacity(h.props.len());
            for (_, s) in &h.props {
                row.push(s.decode(&buf[off..]));
                off += s.size();
            }
            rows.push(row);
        }
    }
    Ok((h, rows))
}

fn column(h: &Header, name: &str) -> Option<usize> {
    h.props.iter().position(|p| p.0 == name)
}

fn require(h: &Header, path: &Path, name: &str) -> Result<usize, FormatError> {
    column(h, name).ok_or_else(|| FormatError::invalid(path, format!("missing vertex property `{name}`")))
}

fn comment_value<'a>(h: &'a Header, key: &str) -> Option<&'a str> {
    h.comments.iter().find_map(|c| c.strip_prefix(key).and_then(|r| r.strip_prefix(' ')).map(str::trim))
}

fn datum_of(h: &Header, path: &Path) -> Result<Datum, FormatError> {
    match comment_value(h, "datum") {
        None => Ok(Datum::default()),
        Some(v) => {
            let p: Result<Vec<f64>, _> = v.split_whitespace().map(str::parse).collect();
            match p.ok().as_deref() {
                Some([x, y, z]) => Ok(Datum { origin: [*x, *y, *z] }),
                _ => Err(FormatError::invalid(path, format!("bad datum comment `{v}`"))),
            }
        }
    }
}

fn position(row: &[f64], c: [usize; 3]) -> Point3<f64> {
    Point3::new(row[c[0]], row[c[1]], row[c[2]])
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>, FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FormatError::io(path, e))?;
    }
    Ok(BufWriter::new(std::fs::File::create(path).map_err(|e| FormatError::io(path, e))?))
}

fn write_header(w: &mut impl Write, comments: &[String], n: usize, props: &[(&str, &str)]) -> std::io::Result<()> {
    writeln!(w, "ply\nformat binary_little_endian 1.0")?;
    for c in comments {
        writeln!(w, "comment {c}")?;
    }
    writeln!(w, "element vertex {n}")?;
    for (ty, name) in props {
        writeln!(w, "property {ty} {name}")?;
    }
    writeln!(w, "end_header")
}

const XYZ: [(&str, &str); 3] = [("double", "x"), ("double", "y"), ("double", "z")];

pub fn write_colored_cloud(path: &Path, cloud: &ColoredPointCloud) -> Result<(), FormatError> {
    let mut w = create(path)?;
    let d = cloud.datum.origin;
    let run = |w: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
        let props = [XYZ[0], XYZ[1], XYZ[2], ("uchar", "red"), ("uchar", "green"), ("uchar", "blue")];
        write_header(w, &[format!("datum {} {} {}", d[0], d[1], d[2])], cloud.len(), &props)?;
        for p in &cloud.points {
            for c in p.position.iter() {
                w.write_all(&c.to_le_bytes())?;
            }
            w.write_all(&p.color)?;
        }
        w.flush()
    };
    run(&mut w).map_err(|e| FormatError::io(path, e))
}

pub fn read_colored_cloud(path: &Path) -> Result<ColoredPointCloud, FormatError> {
    let (h, rows) = read_rows(path)?;
    let xyz = [require(&h, path, "x")?, require(&h, path, "y")?, require(&h, path, "z")?];
    let rgb = [column(&h, "red"), column(&h, "green"), column(&h, "blue")];
    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let position = position(row, xyz);
        if !position.iter().all(|c| c.is_finite()) {
            return Err(FormatError::invalid(path, format!("vertex {i} has a non-finite coordinate")));
        }
        let color = rgb.map(|c| c.map_or(255, |j| row[j].clamp(0.0, 255.0) as u8));
        points.push(ColoredPoint { position, color });
    }
    Ok(ColoredPointCloud { points, datum: datum_of(&h, path)? })
}

fn labeled_comments(cloud: &SemanticPointCloud) -> Vec<String> {
    let d = cloud.datum.origin;
    vec![
        format!("datum {} {} {}", d[0], d[1], d[2]),
        format!("num_classes {}", cloud.num_classes),
    ]
}

fn write_labeled(path: &Path, cloud: &SemanticPointCloud, extra: &[String]) -> Result<(), FormatError> {
    let mut w = create(path)?;
    let mut comments = labeled_comments(cloud);
    comments.extend_from_slice(extra);
    let run = |w: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
        let props = [XYZ[0], XYZ[1], XYZ[2], ("uchar", "class"), ("ushort", "support")];
        write_header(w, &comments, cloud.len(), &props)?;
        for p in &cloud.points {
            for c in p.position.iter() {
                w.write_all(&c.to_le_bytes())?;
            }
            w.write_all(&[p.class])?;
            w.write_all(&p.support.to_le_bytes())?;
        }
        w.flush()
    };
    run(&mut w).map_err(|e| FormatError::io(path, e))
}

/// Labelled cloud with `x, y, z` (double), `class` (uchar) and `support`
/// (ushort). The datum and class count are stored as header comments.
pub fn write_labeled_cloud(path: &Path, cloud: &SemanticPointCloud) -> Result<(), FormatError> {
    write_labeled(path, cloud, &[])
}

/// Reads a labelled cloud. Points with the ignore class are skipped; a
/// missing `support` column defaults to 1. Without a `num_classes` comment
/// the class count defaults to `default_classes` (or the largest id + 1).
pub fn read_labeled_cloud(path: &Path, default_classes: usize) -> Result<SemanticPointCloud, FormatError> {
    let (h, rows) = read_rows(path)?;
    labeled_from_rows(&h, &rows, path, default_classes)
}

fn labeled_from_rows(
    h: &Header,
    rows: &[Vec<f64>],
    path: &Path,
    default_classes: usize,
) -> Result<SemanticPointCloud, FormatError> {
    let xyz = [require(&h, path, "x")?, require(&h, path, "y")?, require(&h, path, "z")?];
    let class_col = column(&h, "class")
        .or_else(|| column(&h, "label"))
        .ok_or_else(|| FormatError::invalid(path, "missing vertex property `class`"))?;
    let support_col = column(&h, "support");
    let declared = match comment_value(&h, "num_classes") {
        Some(v) => Some(
            v.parse::<usize>()
                .map_err(|_| FormatError::invalid(path, format!("bad num_classes comment `{v}`")))?,
        ),
        None => None,
    };
    let mut points = Vec::with_capacity(rows.len());
    let mut max_class = 0usize;
    for (i, row) in rows.iter().enumerate() {
        let c = row[class_col];
        if !(0.0..=255.0).contains(&c) || c.fract() != 0.0 {
            return Err(FormatError::invalid(path, format!("vertex {i}: class {c} is not a uint8")));
        }
        let class = c as u8;
        if class == IGNORE {
            continue;
        }
        let position = position(row, xyz);
        if !position.iter().all(|v| v.is_finite()) {
            return Err(FormatError::invalid(path, format!("vertex {i} has a non-finite coordinate")));
        }
        max_class = max_class.max(class as usize);
        let support = support_col.map_or(1.0, |j| row[j]).clamp(1.0, u16::MAX as f64) as u16;
        points.push(SemanticPoint { position, class, support });
    }
    let k = declared.unwrap_or(default_classes.max(max_class + 1));
    if !points.is_empty() && max_class >= k {
        return Err(FormatError::invalid(path, format!("class {max_class} exceeds the declared {k} classes")));
    }
    Ok(SemanticPointCloud::new(points, k, datum_of(&h, path)?))
}

/// Edge map as a labelled cloud of voxel centres (`support` = member
/// count), with the voxel size and pre-pruning voxel count in comments.
pub fn write_edge_map(path: &Path, map: &VoxelEdgeMap) -> Result<(), FormatError> {
    let extra = [
        format!("voxel_size {}", map.voxel_size()),
        format!("input_voxels {}", map.input_voxels()),
    ];
    write_labeled(path, &map.to_cloud(), &extra)
}

pub fn read_edge_map(path: &Path) -> Result<VoxelEdgeMap, FormatError> {
    let (h, rows) = read_rows(path)?;
    let cloud = labeled_from_rows(&h, &rows, path, crate::classes::DEFAULT_NUM_CLASSES)?;
    let size: f64 = comment_value(&h, "voxel_size")
        .ok_or_else(|| FormatError::invalid(path, "not an edge map: no `voxel_size` comment"))?
        .parse()
        .map_err(|_| FormatError::invalid(path, "bad voxel_size comment"))?;
    let input: usize = comment_value(&h, "input_voxels").and_then(|v| v.parse().ok()).unwrap_or(cloud.len());
    let voxels = cloud
        .points
        .iter()
        .map(|p| EdgeVoxel { index: voxel_index(&p.position, size), class: p.class, members: p.support as u32 })
        .collect();
    VoxelEdgeMap::from_parts(size, cloud.num_classes, cloud.datum, input, voxels)
        .map_err(|e| FormatError::invalid(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, seed: u64) -> SemanticPointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n)
            .map(|_| SemanticPoint {
                position: Point3::new(rng.random_range(-1e3..1e3), rng.random::<f64>(), -rng.random::<f64>() * 1e-7),
                class: rng.random_range(0..8),
                support: rng.random_range(1..=u16::MAX),
            })
            .collect();
        SemanticPointCloud::new(points, 8, Datum { origin: [4.5e5, 5.4e6, 12.25] })
    }

    #[test]
    fn labeled_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.ply");
        let cloud = random_cloud(500, 1);
        write_labeled_cloud(&path, &cloud).unwrap();
        assert_eq!(read_labeled_cloud(&path, 8).unwrap(), cloud);
    }

    #[test]
    fn colored_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let cloud = ColoredPointCloud {
            points: (0..50)
                .map(|i| ColoredPoint { position: Point3::new(i as f64 * 0.1, -1.0, 2.5), color: [i as u8, 7, 255] })
                .collect(),
            datum: Datum { origin: [1.0, 2.0, 3.0] },
        };
        write_colored_cloud(&path, &cloud).unwrap();
        assert_eq!(read_colored_cloud(&path).unwrap(), cloud);
    }

    #[test]
    fn ascii_with_float_props_and_ignore() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n\
             property uchar class\nend_header\n0 0 0 1\n1 0 0 255\n2 0 0 2\n",
        )
        .unwrap();
        let c = read_labeled_cloud(&path, 8).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c.points[1].class, c.points[1].support, c.num_classes), (2, 1, 8));
    }

    #[test]
    fn errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        std::fs::write(&path, "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nproperty uchar class\nend_header\n0 0 0 1\n1 0 zz 1\n").unwrap();
        let e = read_labeled_cloud(&path, 8).unwrap_err().to_string();
        assert!(e.ends_with(":10: non-numeric vertex value"), "{e}");
        std::fs::write(&path, "ply\nformat binary_big_endian 1.0\nend_header\n").unwrap();
        assert!(read_labeled_cloud(&path, 8).unwrap_err().to_string().contains(":2: unsupported format"));
        std::fs::write(&path, "ply\nformat binary_little_endian 1.0\nelement vertex 4\nproperty double x\nproperty double y\nproperty double z\nproperty uchar class\nend_header\n").unwrap();
        assert!(read_labeled_cloud(&path, 8).unwrap_err().to_string().contains("truncated"));
    }

    #[test]
    fn edge_map_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.ply");
        let map = crate::semantic_map::voxelize_and_prune(&random_cloud(3000, 2), 0.5).unwrap();
        write_edge_map(&path, &map).unwrap();
        let back = read_edge_map(&path).unwrap();
        assert_eq!(back.voxels(), map.voxels());
        assert_eq!((back.voxel_size(), back.input_voxels(), back.datum()), (0.5, map.input_voxels(), map.datum()));
    }
}
