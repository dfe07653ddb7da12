//! Per-vertex local thickness by the shrinking-sphere method.
//!
//! For each vertex, the maximal empty ball tangent at the vertex (pushed
//! inward along the negated normal) is the smallest ball through the vertex
//! and any other surface sample: `r = |q - p|^2 / (2 d . (q - p))` minimized
//! over samples `q`. Its diameter is the local thickness, twice the distance
//! to the medial axis. Contacts closing only a tiny separation angle at the
//! ball center are tessellation noise (vertex normals are never exactly true
//! on a sampled smooth surface) and are skipped; when no admissible contact
//! exists the inward ray distance against the triangles supplies the
//! thickness instead.
//!
//! The scan is evaluated in diagonal-normalized coordinates, so results are
//! scale-equivariant to rounding error.

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use crate::mesh::{bbox_diagonal, vertex_normals, SurfaceMesh};
use crate::par;

#[derive(Debug, Error)]
pub enum ThicknessError {
    #[error("mesh has no faces; thickness needs a closed surface")]
    NoFaces,
}

/// Lower clamp and fallback tolerance as a fraction of the diagonal.
const TOL_FRACTION: f64 = 1e-4;
/// Cosine of the minimum separation angle (about 20 degrees) between the
/// tangent point and a contact, seen from the ball center.
const MIN_SEPARATION_ANGLE_COS: f64 = 0.94;

/// Per-surface-vertex local thickness (model units), in `(0, bbox_diagonal]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessField(Vec<f64>);

impl ThicknessField {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
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

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

pub fn local_thickness(mesh: &SurfaceMesh) -> Result<ThicknessField, ThicknessError> {
    if mesh.face_count() == 0 {
        return Err(ThicknessError::NoFaces);
    }
    let diag = bbox_diagonal(mesh);
    let unit = mesh.scaled(1.0 / diag);
    let normals = vertex_normals(&unit);

    let results = par::map_collect(unit.vertex_count(), |vi| {
        vertex_thickness(&unit, vi, -normals[vi])
    });

    let fallbacks = results.iter().filter(|(_, fb)| *fb).count();
    if fallbacks == unit.vertex_count() {
        log::warn!(
            "no tangent-ball contacts anywhere; thickness is ray-cast only \
             (is the mesh open or are normals inverted?)"
        );
    }
    Ok(ThicknessField(
        results.into_iter().map(|(t, _)| t * diag).collect(),
    ))
}

/// Thickness at one vertex of the diagonal-normalized mesh.
/// Returns (thickness, used_ray_fallback).
fn vertex_thickness(mesh: &SurfaceMesh, vi: usize, inward: Vector3<f64>) -> (f64, bool) {
    let p = mesh.vertices()[vi];
    let mut best = f64::INFINITY;
    for (qi, q) in mesh.vertices().iter().enumerate() {
        if qi == vi {
            continue;
        }
        let offset = q - p;
        let denom = inward.dot(&offset);
        if denom <= 0.0 {
            // Contact on or behind the tangent plane.
            continue;
        }
        let r = offset.norm_squared() / (2.0 * denom);
        if r >= best {
            continue;
        }
        // Separation angle at the tangent-ball center: the direction back to
        // p is exactly -inward.
        let center = p + inward * r;
        let to_q = q - center;
        let cos = -inward.dot(&to_q) / to_q.norm();
        if cos > MIN_SEPARATION_ANGLE_COS {
            continue;
        }
        best = r;
    }
    if best.is_finite() {
        ((2.0 * best).clamp(TOL_FRACTION, 1.0), false)
    } else {
        (ray_thickness(mesh, p, inward), true)
    }
}

/// Distance to the first triangle hit along the inward ray, capped at the
/// (normalized) bounding-box diagonal.
fn ray_thickness(mesh: &SurfaceMesh, p: Point3<f64>, dir: Vector3<f64>) -> f64 {
    let mut best = 1.0f64;
    let min_s = 1e-6; // skip the faces incident to p itself
    for f in mesh.faces() {
        let a = mesh.vertices()[f[0]];
        let e1 = mesh.vertices()[f[1]] - a;
        let e2 = mesh.vertices()[f[2]] - a;
        let pvec = dir.cross(&e2);
        let det = e1.dot(&pvec);
        if det.abs() < 1e-14 {
            continue;
        }
        let inv = 1.0 / det;
        let tvec = p - a;
        let u = tvec.dot(&pvec) * inv;
        if !(-1e-9..=1.0 + 1e-9).contains(&u) {
            continue;
        }
        let qvec = tvec.cross(&e1);
        let v = dir.dot(&qvec) * inv;
        if v < -1e-9 || u + v > 1.0 + 1e-9 {
            continue;
        }
        let s = e2.dot(&qvec) * inv;
        if s > min_s && s < best {
            best = s;
        }
    }
    best.clamp(TOL_FRACTION, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use nalgebra::Vector3 as V3;

    #[test]
    fn slab_thickness() {
        let t = 0.01;
        let slab = shapes::box_mesh(Point3::origin(), V3::new(0.1, 0.1, t), [20, 20, 2]);
        let field = local_thickness(&slab).unwrap();
        let mut checked = 0;
        for (p, &tv) in slab.vertices().iter().zip(field.values()) {
            let interior = p.x > 0.03 && p.x < 0.07 && p.y > 0.03 && p.y < 0.07;
            let on_face = p.z == 0.0 || p.z == t;
            if interior && on_face {
                assert!(
                    (0.9 * t..=1.1 * t).contains(&tv),
                    "slab thickness {tv} at {p}"
                );
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn sphere_thickness_is_diameter() {
        let r = 0.5;
        let sphere = shapes::icosphere(r, 3);
        let field = local_thickness(&sphere).unwrap();
        for &tv in field.values() {
            assert!(
                (tv - 2.0 * r).abs() / (2.0 * r) < 0.10,
                "sphere thickness {tv}"
            );
        }
    }

    #[test]
    fn tube_wall_thickness() {
        let wall = 0.003;
        let tube = shapes::tube(0.025, wall, 0.04, 48, 32);
        let field = local_thickness(&tube).unwrap();
        let mut checked = 0;
        for (p, &tv) in tube.vertices().iter().zip(field.values()) {
            let radial = (p.x * p.x + p.y * p.y).sqrt();
            let on_outer = (radial - 0.025).abs() < 1e-9;
            let mid_height = p.z > 0.012 && p.z < 0.028;
            if on_outer && mid_height {
                assert!(
                    (tv - wall).abs() / wall < 0.15,
                    "tube wall thickness {tv} at {p}"
                );
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn scale_equivariance() {
        let mesh = shapes::icosphere(0.2, 2);
        let alpha = 3.7;
        let base = local_thickness(&mesh).unwrap();
        let scaled = local_thickness(&mesh.scaled(alpha)).unwrap();
        for (a, b) in base.values().iter().zip(scaled.values()) {
            assert!(
                (b - alpha * a).abs() <= 1e-6 * alpha * a,
                "scale equivariance broke: {a} vs {b}"
            );
        }
    }

    #[test]
    fn bounded_and_deterministic() {
        let mesh = shapes::thin_wall_model();
        let diag = bbox_diagonal(&mesh);
        let a = local_thickness(&mesh).unwrap();
        let b = local_thickness(&mesh).unwrap();
        assert_eq!(a, b);
        for &t in a.values() {
            assert!(t > 0.0 && t <= diag && t.is_finite());
        }
    }
}
