//! Triangle surface meshes: file I/O, normals, bounding geometry, and
//! per-vertex normal displacement.

mod io;

pub use io::{load_mesh, save_colored_mesh, MeshFormat};

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use crate::par;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("color count {colors} does not match vertex count {vertices}")]
    ColorLength { colors: usize, vertices: usize },
    #[error("field length {field} does not match vertex count {vertices}")]
    LengthMismatch { field: usize, vertices: usize },
    #[error("displacement entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// An indexed triangle mesh with optional per-vertex RGB colors in `[0, 1]`.
///
/// Immutable after construction; operations return new meshes. Coordinates are
/// model units, interpreted as meters once the mesh enters simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    colors: Option<Vec<[f64; 3]>>,
}

impl SurfaceMesh {
    /// Validates invariants: nonempty vertex set, in-range and non-degenerate
    /// face indices, full vertex coverage when faces are present, matching
    /// color count. A faceless mesh is accepted as a bare point set (used for
    /// correspondence queries); it cannot be displaced or saved with faces.
    pub fn new(
        vertices: Vec<Point3<f64>>,
        faces: Vec<[usize; 3]>,
        colors: Option<Vec<[f64; 3]>>,
    ) -> Result<Self, MeshError> {
        if vertices.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        let n = vertices.len();
        let mut used = vec![false; n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(MeshError::Topology(format!(
                        "face {fi} references vertex {v} but mesh has {n} vertices"
                    )));
                }
                used[v] = true;
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::Topology(format!(
                    "face {fi} has repeated vertex indices {f:?}"
                )));
            }
        }
        if !faces.is_empty() {
            if let Some(orphan) = used.iter().position(|u| !u) {
                return Err(MeshError::Topology(format!(
                    "vertex {orphan} belongs to no face"
                )));
            }
        }
        if let Some(c) = &colors {
            if c.len() != n {
                return Err(MeshError::ColorLength {
                    colors: c.len(),
                    vertices: n,
                });
            }
        }
        Ok(Self {
            vertices,
            faces,
            colors,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn colors(&self) -> Option<&[[f64; 3]]> {
        self.colors.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Replace the color set (validated against the vertex count).
    pub fn with_colors(mut self, colors: Option<Vec<[f64; 3]>>) -> Result<Self, MeshError> {
        if let Some(c) = &colors {
            if c.len() != self.vertices.len() {
                return Err(MeshError::ColorLength {
                    colors: c.len(),
                    vertices: self.vertices.len(),
                });
            }
        }
        self.colors = colors;
        Ok(self)
    }

    /// Uniformly scale all coordinates about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p * factor).collect(),
            faces: self.faces.clone(),
            colors: self.colors.clone(),
        }
    }

    /// Axis-aligned bounding box as (min, max) corners.
    pub fn bbox(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices[1..] {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// Length of the axis-aligned bounding-box diagonal; the "model size" every
/// displacement cap and style amplitude is expressed against.
pub fn bbox_diagonal(mesh: &SurfaceMesh) -> f64 {
    let (lo, hi) = mesh.bbox();
    (hi - lo).norm()
}

/// Area-weighted per-vertex unit normals.
///
/// Each incident face contributes its area-scaled normal (the raw cross
/// product); the sum is normalized. Vertices whose incident faces all have
/// zero area get the fixed fallback `+Z` and a warning.
pub fn vertex_normals(mesh: &SurfaceMesh) -> Vec<Vector3<f64>> {
    let mut acc = vec![Vector3::zeros(); mesh.vertex_count()];
    for f in &mesh.faces {
        let [a, b, c] = *f;
        let n = (mesh.vertices[b] - mesh.vertices[a]).cross(&(mesh.vertices[c] - mesh.vertices[a]));
        acc[a] += n;
        acc[b] += n;
        acc[c] += n;
    }
    let mut degenerate = 0usize;
    let normals: Vec<Vector3<f64>> = acc
        .into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                degenerate += 1;
                Vector3::z()
            }
        })
        .collect();
    if degenerate > 0 {
        log::warn!("{degenerate} vertices had no incident face area; normals fall back to +Z");
    }
    normals
}

/// True when every edge is shared by exactly two faces.
pub fn is_closed(mesh: &SurfaceMesh) -> bool {
    let mut counts = std::collections::HashMap::new();
    for f in mesh.faces() {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            let key = (a.min(b), a.max(b));
            *counts.entry(key).or_insert(0u32) += 1;
        }
    }
    !counts.is_empty() && counts.values().all(|&c| c == 2)
}

/// Signed enclosed volume by the divergence theorem. Positive for a closed,
/// outward-oriented surface.
pub fn enclosed_volume(mesh: &SurfaceMesh) -> f64 {
    mesh.faces()
        .iter()
        .map(|f| {
            let a = mesh.vertices()[f[0]].coords;
            let b = mesh.vertices()[f[1]].coords;
            let c = mesh.vertices()[f[2]].coords;
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum()
}

/// Signed per-vertex distances along vertex normals (model units).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField(Vec<f64>);

impl DisplacementField {
    pub fn new(values: Vec<f64>) -> Result<Self, MeshError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Move each vertex by its displacement along the given (pre-displacement)
/// normals. Topology and colors are untouched.
pub fn apply_displacement_along(
    mesh: &SurfaceMesh,
    normals: &[Vector3<f64>],
    d: &DisplacementField,
) -> Result<SurfaceMesh, MeshError> {
    let n = mesh.vertex_count();
    if d.len() != n || normals.len() != n {
        return Err(MeshError::LengthMismatch {
            field: d.len().min(normals.len()),
            vertices: n,
        });
    }
    let verts = par::map_collect(n, |i| mesh.vertices[i] + normals[i] * d.values()[i]);
    Ok(SurfaceMesh {
        vertices: verts,
        faces: mesh.faces.clone(),
        colors: mesh.colors.clone(),
    })
}

/// Move each vertex by its displacement along the mesh's own current normals.
pub fn apply_displacement(
    mesh: &SurfaceMesh,
    d: &DisplacementField,
) -> Result<SurfaceMesh, MeshError> {
    let normals = vertex_normals(mesh);
    apply_displacement_along(mesh, &normals, d)
}
