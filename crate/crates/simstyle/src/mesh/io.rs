//! OBJ and PLY reading/writing.
//!
//! Supported subset, kept deliberately small:
//! - ASCII OBJ: `v x y z` with the nonstandard `v x y z r g b` color
//!   extension, `f` with positive indices (n-gons are fan-triangulated,
//!   `a/b/c` attribute suffixes ignored). Other statements are skipped.
//! - PLY: ASCII or binary little-endian, vertex properties
//!   `x y z [red green blue]` (float or double coordinates, uchar colors),
//!   one face element with a `vertex_indices` list. Unrecognized vertex
//!   properties are skipped on read.
//!
//! Writing always emits ASCII. Coordinates are printed with Rust's shortest
//! round-trip `f64` formatting, so a save/load cycle reproduces them exactly;
//! PLY colors quantize to `uchar`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::{MeshError, SurfaceMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Infer from the file extension (case-insensitive).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Some(Self::Obj),
            Some("ply") => Some(Self::Ply),
            _ => None,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> MeshError {
    MeshError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Load a surface mesh. Vertex order is preserved from the file.
pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<SurfaceMesh, MeshError> {
    let path = path.as_ref();
    match format {
        MeshFormat::Obj => load_obj(path),
        MeshFormat::Ply => load_ply(path),
    }
}

/// Write a mesh (with its colors, when present) as ASCII OBJ or PLY.
pub fn save_colored_mesh(
    mesh: &SurfaceMesh,
    path: impl AsRef<Path>,
    format: MeshFormat,
) -> Result<(), MeshError> {
    let path = path.as_ref();
    let text = match format {
        MeshFormat::Obj => obj_string(mesh),
        MeshFormat::Ply => ply_string(mesh),
    };
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

fn load_obj(path: &Path) -> Result<SurfaceMesh, MeshError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut vertices = Vec::new();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let mut fields = raw.split_whitespace();
        match fields.next() {
            Some("v") => {
                let nums: Vec<f64> = fields
                    .map(|t| {
                        t.parse()
                            .map_err(|_| parse_err(path, line, format!("bad number `{t}`")))
                    })
                    .collect::<Result<_, _>>()?;
                match nums.len() {
                    3 => vertices.push(Point3::new(nums[0], nums[1], nums[2])),
                    6 => {
                        vertices.push(Point3::new(nums[0], nums[1], nums[2]));
                        colors.push([nums[3], nums[4], nums[5]]);
                    }
                    k => return Err(parse_err(path, line, format!("vertex with {k} fields"))),
                }
            }
            Some("f") => {
                let idx: Vec<usize> = fields
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        match head.parse::<i64>() {
                            Ok(v) if v >= 1 => Ok(v as usize - 1),
                            _ => Err(parse_err(
                                path,
                                line,
                                format!("face index `{t}` (positive indices only)"),
                            )),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(path, line, "face with fewer than 3 vertices"));
                }
                for i in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[i], idx[i + 1]]);
                }
            }
            _ => {}
        }
    }
    let colors = if colors.is_empty() {
        None
    } else if colors.len() == vertices.len() {
        Some(colors)
    } else {
        return Err(parse_err(
            path,
            0,
            "some vertices carry colors and some do not",
        ));
    };
    SurfaceMesh::new(vertices, faces, colors)
}

fn obj_string(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    match mesh.colors() {
        Some(colors) => {
            for (p, c) in mesh.vertices().iter().zip(colors) {
                writeln!(out, "v {} {} {} {} {} {}", p.x, p.y, p.z, c[0], c[1], c[2]).unwrap();
            }
        }
        None => {
            for p in mesh.vertices() {
                writeln!(out, "v {} {} {}", p.x, p.y, p.z).unwrap();
            }
        }
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyScalar {
    Char,
    Uchar,
    Short,
    Ushort,
    Int,
    Uint,
    Float,
    Double,
}

impl PlyScalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::Char,
            "uchar" | "uint8" => Self::Uchar,
            "short" | "int16" => Self::Short,
            "ushort" | "uint16" => Self::Ushort,
            "int" | "int32" => Self::Int,
            "uint" | "uint32" => Self::Uint,
            "float" | "float32" => Self::Float,
            "double" | "float64" => Self::Double,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::Char | Self::Uchar => 1,
            Self::Short | Self::Ushort => 2,
            Self::Int | Self::Uint | Self::Float => 4,
            Self::Double => 8,
        }
    }

    fn read_le(self, bytes: &[u8]) -> f64 {
        match self {
            Self::Char => bytes[0] as i8 as f64,
            Self::Uchar => bytes[0] as f64,
            Self::Short => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Self::Ushort => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Self::Int => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::Uint => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::Float => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::Double => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
struct PlyHeader {
    ascii: bool,
    vertex_count: usize,
    face_count: usize,
    /// (name, type) in declaration order for the vertex element.
    vertex_props: Vec<(String, PlyScalar)>,
    face_count_type: PlyScalar,
    face_index_type: PlyScalar,
    body_offset: usize,
}

fn parse_ply_header(path: &Path, data: &[u8]) -> Result<PlyHeader, MeshError> {
    let head_end = data
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or_else(|| parse_err(path, 0, "missing end_header"))?;
    let body_offset = head_end + 11;
    let header_text = std::str::from_utf8(&data[..head_end])
        .map_err(|_| parse_err(path, 0, "header is not UTF-8"))?;

    let mut ascii = None;
    let mut vertex_count = 0usize;
    let mut face_count = 0usize;
    let mut vertex_props = Vec::new();
    let mut face_count_type = PlyScalar::Uchar;
    let mut face_index_type = PlyScalar::Int;
    let mut current = String::new();

    for (ln, raw) in header_text.lines().enumerate() {
        let line = ln + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.as_slice() {
            ["ply"] | ["comment", ..] | ["obj_info", ..] | [] => {}
            ["format", fmt, _version] => {
                ascii = Some(match *fmt {
                    "ascii" => true,
                    "binary_little_endian" => false,
                    other => {
                        return Err(parse_err(path, line, format!("unsupported format {other}")))
                    }
                });
            }
            ["element", name, count] => {
                current = name.to_string();
                let count: usize = count
                    .parse()
                    .map_err(|_| parse_err(path, line, "bad element count"))?;
                match *name {
                    "vertex" => vertex_count = count,
                    "face" => face_count = count,
                    _ if count != 0 => {
                        return Err(parse_err(
                            path,
                            line,
                            format!("unsupported element `{name}`"),
                        ))
                    }
                    _ => {}
                }
            }
            ["property", "list", count_ty, index_ty, name] if current == "face" => {
                if *name != "vertex_indices" && *name != "vertex_index" {
                    return Err(parse_err(path, line, format!("unknown face list `{name}`")));
                }
                face_count_type = PlyScalar::parse(count_ty)
                    .ok_or_else(|| parse_err(path, line, "bad list count type"))?;
                face_index_type = PlyScalar::parse(index_ty)
                    .ok_or_else(|| parse_err(path, line, "bad list index type"))?;
            }
            ["property", ty, name] if current == "vertex" => {
                let ty = PlyScalar::parse(ty)
                    .ok_or_else(|| parse_err(path, line, format!("bad property type {ty}")))?;
                vertex_props.push((name.to_string(), ty));
            }
            ["property", ..] => {}
            other => {
                return Err(parse_err(
                    path,
                    line,
                    format!("unrecognized header line {other:?}"),
                ))
            }
        }
    }
    Ok(PlyHeader {
        ascii: ascii.ok_or_else(|| parse_err(path, 0, "missing format line"))?,
        vertex_count,
        face_count,
        vertex_props,
        face_count_type,
        face_index_type,
        body_offset,
    })
}

fn load_ply(path: &Path) -> Result<SurfaceMesh, MeshError> {
    let data = fs::read(path).map_err(|e| io_err(path, e))?;
    let header = parse_ply_header(path, &data)?;

    let find = |name: &str| header.vertex_props.iter().position(|(n, _)| n == name);
    let (ix, iy, iz) = match (find("x"), find("y"), find("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(parse_err(path, 0, "vertex element lacks x/y/z")),
    };
    let color_idx = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some((r, g, b)),
        _ => None,
    };

    let mut vertices = Vec::with_capacity(header.vertex_count);
    let mut colors = Vec::new();
    let mut faces = Vec::with_capacity(header.face_count);

    let push_vertex = |row: &[f64], vertices: &mut Vec<Point3<f64>>, colors: &mut Vec<[f64; 3]>| {
        vertices.push(Point3::new(row[ix], row[iy], row[iz]));
        if let Some((r, g, b)) = color_idx {
            colors.push([row[r] / 255.0, row[g] / 255.0, row[b] / 255.0]);
        }
    };

    if header.ascii {
        let body = std::str::from_utf8(&data[header.body_offset..])
            .map_err(|_| parse_err(path, 0, "ascii body is not UTF-8"))?;
        let mut lines = body.lines().enumerate();
        let mut row = vec![0.0; header.vertex_props.len()];
        for _ in 0..header.vertex_count {
            let (ln, raw) = lines
                .next()
                .ok_or_else(|| parse_err(path, 0, "truncated vertex block"))?;
            let mut fields = raw.split_whitespace();
            for slot in row.iter_mut() {
                let tok = fields
                    .next()
                    .ok_or_else(|| parse_err(path, ln + 1, "short vertex line"))?;
                *slot = tok
                    .parse()
                    .map_err(|_| parse_err(path, ln + 1, format!("bad number `{tok}`")))?;
            }
            push_vertex(&row, &mut vertices, &mut colors);
        }
        for _ in 0..header.face_count {
            let (ln, raw) = lines
                .next()
                .ok_or_else(|| parse_err(path, 0, "truncated face block"))?;
            let nums: Vec<usize> = raw
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| parse_err(path, ln + 1, format!("bad face index `{t}`")))
                })
                .collect::<Result<_, _>>()?;
            if nums.is_empty() || nums.len() != nums[0] + 1 {
                return Err(parse_err(path, ln + 1, "face list length mismatch"));
            }
            let idx = &nums[1..];
            for i in 1..idx.len() - 1 {
                faces.push([idx[0], idx[i], idx[i + 1]]);
            }
        }
    } else {
        let mut cursor = header.body_offset;
        let mut take = |ty: PlyScalar| -> Result<f64, MeshError> {
            let end = cursor + ty.size();
            if end > data.len() {
                return Err(parse_err(path, 0, "truncated binary body"));
            }
            let v = ty.read_le(&data[cursor..end]);
            cursor = end;
            Ok(v)
        };
        let mut row = vec![0.0; header.vertex_props.len()];
        for _ in 0..header.vertex_count {
            for (slot, (_, ty)) in row.iter_mut().zip(&header.vertex_props) {
                *slot = take(*ty)?;
            }
            push_vertex(&row, &mut vertices, &mut colors);
        }
        for _ in 0..header.face_count {
            let count = take(header.face_count_type)? as usize;
            if count < 3 {
                return Err(parse_err(path, 0, "face with fewer than 3 vertices"));
            }
            let mut idx = Vec::with_capacity(count);
            for _ in 0..count {
                idx.push(take(header.face_index_type)? as usize);
            }
            for i in 1..idx.len() - 1 {
                faces.push([idx[0], idx[i], idx[i + 1]]);
            }
        }
    }

    let colors = if colors.is_empty() { None } else { Some(colors) };
    SurfaceMesh::new(vertices, faces, colors)
}

fn ply_string(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    let has_colors = mesh.colors().is_some();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", mesh.vertex_count()).unwrap();
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if has_colors {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    writeln!(out, "element face {}", mesh.face_count()).unwrap();
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for (i, p) in mesh.vertices().iter().enumerate() {
        write!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
        if let Some(colors) = mesh.colors() {
            let c = colors[i];
            write!(
                out,
                " {} {} {}",
                quantize(c[0]),
                quantize(c[1]),
                quantize(c[2])
            )
            .unwrap();
        }
        out.push('\n');
    }
    for f in mesh.faces() {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    out
}

fn quantize(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::bbox_diagonal;
    use crate::shapes;
    use tempfile::tempdir;

    #[test]
    fn unit_tetrahedron_obj_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("tet.obj");
        fs::write(
            &path,
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\nf 1 4 3\n",
        )
        .unwrap();
        let mesh = load_mesh(&path, MeshFormat::Obj).unwrap();
        assert_eq!(mesh.vertex_count(), 4);
        assert_eq!(mesh.face_count(), 4);

        let back = dir.path().join("tet2.obj");
        save_colored_mesh(&mesh, &back, MeshFormat::Obj).unwrap();
        let reloaded = load_mesh(&back, MeshFormat::Obj).unwrap();
        assert_eq!(mesh, reloaded);
    }

    #[test]
    fn out_of_range_face_is_topology_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 10\n").unwrap();
        let err = load_mesh(&path, MeshFormat::Obj).unwrap_err();
        assert!(matches!(err, MeshError::Topology(_)), "{err}");
    }

    #[test]
    fn red_cube_ply_round_trip() {
        let cube = shapes::unit_cube()
            .with_colors(Some(vec![[1.0, 0.0, 0.0]; 8]))
            .unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("cube.ply");
        save_colored_mesh(&cube, &path, MeshFormat::Ply).unwrap();
        let reloaded = load_mesh(&path, MeshFormat::Ply).unwrap();
        assert_eq!(reloaded.colors().unwrap(), &[[1.0, 0.0, 0.0]; 8][..]);
        assert_eq!(reloaded.vertices(), cube.vertices());
        assert_eq!(reloaded.faces(), cube.faces());
    }

    #[test]
    fn binary_ply_matches_ascii() {
        let cube = shapes::unit_cube();
        let dir = tempdir().unwrap();
        let path = dir.path().join("cube_bin.ply");

        // Hand-build a binary little-endian file with float coordinates.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"ply\nformat binary_little_endian 1.0\n");
        bytes.extend_from_slice(format!("element vertex {}\n", cube.vertex_count()).as_bytes());
        bytes.extend_from_slice(b"property float x\nproperty float y\nproperty float z\n");
        bytes.extend_from_slice(format!("element face {}\n", cube.face_count()).as_bytes());
        bytes.extend_from_slice(b"property list uchar int vertex_indices\nend_header\n");
        for p in cube.vertices() {
            for k in 0..3 {
                bytes.extend_from_slice(&(p[k] as f32).to_le_bytes());
            }
        }
        for f in cube.faces() {
            bytes.push(3);
            for &v in f {
                bytes.extend_from_slice(&(v as i32).to_le_bytes());
            }
        }
        fs::write(&path, bytes).unwrap();

        let mesh = load_mesh(&path, MeshFormat::Ply).unwrap();
        assert_eq!(mesh.faces(), cube.faces());
        for (a, b) in mesh.vertices().iter().zip(cube.vertices()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn colorless_mesh_stays_colorless() {
        let dir = tempdir().unwrap();
        for fmt in [MeshFormat::Obj, MeshFormat::Ply] {
            let path = dir.path().join(match fmt {
                MeshFormat::Obj => "plain.obj",
                MeshFormat::Ply => "plain.ply",
            });
            save_colored_mesh(&shapes::unit_cube(), &path, fmt).unwrap();
            let reloaded = load_mesh(&path, fmt).unwrap();
            assert!(reloaded.colors().is_none());
        }
    }

    #[test]
    fn large_mesh_round_trip_is_exact() {
        // Shortest round-trip float formatting makes text I/O lossless, well
        // inside the 1e-6 budget.
        let sphere = shapes::icosphere(0.731, 4);
        assert!(sphere.vertex_count() > 2000);
        let dir = tempdir().unwrap();
        for fmt in [MeshFormat::Obj, MeshFormat::Ply] {
            let path = dir.path().join(match fmt {
                MeshFormat::Obj => "s.obj",
                MeshFormat::Ply => "s.ply",
            });
            save_colored_mesh(&sphere, &path, fmt).unwrap();
            let reloaded = load_mesh(&path, fmt).unwrap();
            let mut worst = 0.0f64;
            for (a, b) in reloaded.vertices().iter().zip(sphere.vertices()) {
                worst = worst.max((a - b).norm());
            }
            assert_eq!(worst, 0.0);
            assert_eq!(reloaded.faces(), sphere.faces());
        }
        let _ = bbox_diagonal(&sphere);
    }
}
