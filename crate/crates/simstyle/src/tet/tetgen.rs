//! TetGen `.node`/`.ele` ASCII import and export.
//!
//! Supported subset: 3D points, 4-node tetrahedra, no attributes, no boundary
//! markers (attribute columns present in a file are ignored). Files may be 0-
//! or 1-based; the base is auto-detected from the first node's index. Export
//! writes 1-based files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Point3;

use super::{TetError, TetMesh};

fn io_err(path: &Path, source: std::io::Error) -> TetError {
    TetError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> TetError {
    TetError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Numbered data lines: line number, index column, remaining fields.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(ln, raw)| {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((ln + 1, trimmed.split_whitespace().collect()))
        }
    })
}

pub fn load_tetgen(
    node_path: impl AsRef<Path>,
    ele_path: impl AsRef<Path>,
) -> Result<TetMesh, TetError> {
    let node_path = node_path.as_ref();
    let ele_path = ele_path.as_ref();

    let node_text = fs::read_to_string(node_path).map_err(|e| io_err(node_path, e))?;
    let mut lines = data_lines(&node_text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(node_path, 0, "empty node file"))?;
    if header.len() < 2 {
        return Err(parse_err(node_path, ln, "short node header"));
    }
    let n_nodes: usize = header[0]
        .parse()
        .map_err(|_| parse_err(node_path, ln, "bad node count"))?;
    let dim: usize = header[1]
        .parse()
        .map_err(|_| parse_err(node_path, ln, "bad dimension"))?;
    if dim != 3 {
        return Err(parse_err(node_path, ln, format!("dimension {dim}, want 3")));
    }

    let mut base: Option<i64> = None;
    let mut nodes = vec![Point3::origin(); n_nodes];
    let mut filled = vec![false; n_nodes];
    for _ in 0..n_nodes {
        let (ln, fields) = lines
            .next()
            .ok_or_else(|| parse_err(node_path, 0, "truncated node file"))?;
        if fields.len() < 4 {
            return Err(parse_err(node_path, ln, "short node line"));
        }
        let raw_idx: i64 = fields[0]
            .parse()
            .map_err(|_| parse_err(node_path, ln, "bad node index"))?;
        let base = *base.get_or_insert_with(|| raw_idx);
        if base != 0 && base != 1 {
            return Err(TetError::IndexBase(base));
        }
        let idx = raw_idx - base;
        if idx < 0 || idx as usize >= n_nodes {
            return Err(parse_err(node_path, ln, format!("node index {raw_idx} out of range")));
        }
        let mut coord = [0.0f64; 3];
        for (k, slot) in coord.iter_mut().enumerate() {
            *slot = fields[1 + k]
                .parse()
                .map_err(|_| parse_err(node_path, ln, format!("bad coordinate `{}`", fields[1 + k])))?;
        }
        nodes[idx as usize] = Point3::new(coord[0], coord[1], coord[2]);
        filled[idx as usize] = true;
    }
    if let Some(missing) = filled.iter().position(|f| !f) {
        return Err(parse_err(node_path, 0, format!("node {missing} missing")));
    }
    let base = base.unwrap_or(0);

    let ele_text = fs::read_to_string(ele_path).map_err(|e| io_err(ele_path, e))?;
    let mut lines = data_lines(&ele_text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(ele_path, 0, "empty ele file"))?;
    let n_tets: usize = header[0]
        .parse()
        .map_err(|_| parse_err(ele_path, ln, "bad tet count"))?;
    if header.len() >= 2 {
        let per: usize = header[1]
            .parse()
            .map_err(|_| parse_err(ele_path, ln, "bad nodes-per-tet"))?;
        if per != 4 {
            return Err(parse_err(ele_path, ln, format!("{per}-node elements unsupported")));
        }
    }
    let mut tets = Vec::with_capacity(n_tets);
    for _ in 0..n_tets {
        let (ln, fields) = lines
            .next()
            .ok_or_else(|| parse_err(ele_path, 0, "truncated ele file"))?;
        if fields.len() < 5 {
            return Err(parse_err(ele_path, ln, "short element line"));
        }
        let mut tet = [0usize; 4];
        for (k, slot) in tet.iter_mut().enumerate() {
            let raw: i64 = fields[1 + k]
                .parse()
                .map_err(|_| parse_err(ele_path, ln, format!("bad node index `{}`", fields[1 + k])))?;
            let idx = raw - base;
            if idx < 0 || idx as usize >= n_nodes {
                return Err(parse_err(ele_path, ln, format!("node index {raw} out of range")));
            }
            *slot = idx as usize;
        }
        tets.push(tet);
    }
    TetMesh::new(nodes, tets)
}

/// Write `.node`/`.ele` files (1-based, no attributes).
pub fn save_tetgen(
    tm: &TetMesh,
    node_path: impl AsRef<Path>,
    ele_path: impl AsRef<Path>,
) -> Result<(), TetError> {
    let node_path = node_path.as_ref();
    let ele_path = ele_path.as_ref();
    let mut out = String::new();
    writeln!(out, "{} 3 0 0", tm.node_count()).unwrap();
    for (i, p) in tm.nodes().iter().enumerate() {
        writeln!(out, "{} {} {} {}", i + 1, p.x, p.y, p.z).unwrap();
    }
    fs::write(node_path, out).map_err(|e| io_err(node_path, e))?;

    let mut out = String::new();
    writeln!(out, "{} 4 0", tm.tet_count()).unwrap();
    for (i, t) in tm.tets().iter().enumerate() {
        writeln!(out, "{} {} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1).unwrap();
    }
    fs::write(ele_path, out).map_err(|e| io_err(ele_path, e))
}
