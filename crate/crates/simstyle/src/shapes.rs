//! Procedural closed test shapes: primitives for the unit tests, the canonical
//! beam, and the thin-wall regression model. All generators are deterministic.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::mesh::SurfaceMesh;

/// Axis-aligned unit cube `[0,1]^3`, 8 vertices, 12 triangles.
///
/// Every face is split along the diagonal joining its two even-parity corners
/// (the split compatible with the alternating 5-tet cube decomposition), which
/// also gives each corner equal area weight from its three faces, so corner
/// normals come out as `normalize(±1, ±1, ±1)`.
pub fn unit_cube() -> SurfaceMesh {
    let vertices = (0..8)
        .map(|i| {
            Point3::new(
                (i & 1) as f64,
                ((i >> 1) & 1) as f64,
                ((i >> 2) & 1) as f64,
            )
        })
        .collect();
    let faces = vec![
        [0, 2, 3],
        [0, 3, 1], // z = 0
        [5, 7, 6],
        [5, 6, 4], // z = 1
        [0, 1, 5],
        [0, 5, 4], // y = 0
        [6, 7, 3],
        [6, 3, 2], // y = 1
        [0, 4, 6],
        [0, 6, 2], // x = 0
        [3, 7, 5],
        [3, 5, 1], // x = 1
    ];
    SurfaceMesh::new(vertices, faces, None).unwrap()
}

/// Axis-aligned closed box with grid-subdivided faces.
///
/// `origin` is the min corner, `dims` the edge lengths, `divs` the number of
/// cells per axis. Shared edge/corner vertices are welded.
pub fn box_mesh(origin: Point3<f64>, dims: Vector3<f64>, divs: [usize; 3]) -> SurfaceMesh {
    let [nx, ny, nz] = divs;
    assert!(nx >= 1 && ny >= 1 && nz >= 1);
    let step = Vector3::new(dims.x / nx as f64, dims.y / ny as f64, dims.z / nz as f64);

    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vertex_at = |i: usize, j: usize, k: usize| -> usize {
        *index.entry((i, j, k)).or_insert_with(|| {
            vertices.push(Point3::new(
                origin.x + step.x * i as f64,
                origin.y + step.y * j as f64,
                origin.z + step.z * k as f64,
            ));
            vertices.len() - 1
        })
    };

    let mut quad = |a: usize, b: usize, c: usize, d: usize, flip: bool| {
        if flip {
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        } else {
            faces.push([b, c, d]);
            faces.push([b, d, a]);
        }
    };

    for j in 0..ny {
        for k in 0..nz {
            // -X side, outward normal (-1, 0, 0)
            let (a, b, c, d) = (
                vertex_at(0, j, k),
                vertex_at(0, j, k + 1),
                vertex_at(0, j + 1, k + 1),
                vertex_at(0, j + 1, k),
            );
            quad(a, b, c, d, (j + k) % 2 == 0);
            // +X side
            let (a, b, c, d) = (
                vertex_at(nx, j, k),
                vertex_at(nx, j + 1, k),
                vertex_at(nx, j + 1, k + 1),
                vertex_at(nx, j, k + 1),
            );
            quad(a, b, c, d, (j + k) % 2 == 0);
        }
    }
    for i in 0..nx {
        for k in 0..nz {
            // -Y side
            let (a, b, c, d) = (
                vertex_at(i, 0, k),
                vertex_at(i + 1, 0, k),
                vertex_at(i + 1, 0, k + 1),
                vertex_at(i, 0, k + 1),
            );
            quad(a, b, c, d, (i + k) % 2 == 0);
            // +Y side
            let (a, b, c, d) = (
                vertex_at(i, ny, k),
                vertex_at(i, ny, k + 1),
                vertex_at(i + 1, ny, k + 1),
                vertex_at(i + 1, ny, k),
            );
            quad(a, b, c, d, (i + k) % 2 == 0);
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            // -Z side
            let (a, b, c, d) = (
                vertex_at(i, j, 0),
                vertex_at(i, j + 1, 0),
                vertex_at(i + 1, j + 1, 0),
                vertex_at(i + 1, j, 0),
            );
            quad(a, b, c, d, (i + j) % 2 == 0);
            // +Z side
            let (a, b, c, d) = (
                vertex_at(i, j, nz),
                vertex_at(i + 1, j, nz),
                vertex_at(i + 1, j + 1, nz),
                vertex_at(i, j + 1, nz),
            );
            quad(a, b, c, d, (i + j) % 2 == 0);
        }
    }
    SurfaceMesh::new(vertices, faces, None).unwrap()
}

/// Icosphere of the given radius centered at the origin.
///
/// The icosahedron vertex set is centrally symmetric and subdivision preserves
/// that, so every vertex has an exact antipode (the thickness tests rely on
/// this).
pub fn icosphere(radius: f64, subdivisions: u32) -> SurfaceMesh {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, t, 0.0),
        Vector3::new(1.0, t, 0.0),
        Vector3::new(-1.0, -t, 0.0),
        Vector3::new(1.0, -t, 0.0),
        Vector3::new(0.0, -1.0, t),
        Vector3::new(0.0, 1.0, t),
        Vector3::new(0.0, -1.0, -t),
        Vector3::new(0.0, 1.0, -t),
        Vector3::new(t, 0.0, -1.0),
        Vector3::new(t, 0.0, 1.0),
        Vector3::new(-t, 0.0, -1.0),
        Vector3::new(-t, 0.0, 1.0),
    ]
    .into_iter()
    .map(|v| v.normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    verts.push((verts[a] + verts[b]).normalize());
                    verts.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }

    let vertices = verts.into_iter().map(|v| Point3::from(v * radius)).collect();
    SurfaceMesh::new(vertices, faces, None).unwrap()
}

/// Closed hollow tube: outer radius, wall thickness, height, with annular caps.
/// Inner and outer walls share the same angular/vertical grid, so every outer
/// vertex has an inner vertex radially opposite it.
pub fn tube(
    outer_radius: f64,
    wall: f64,
    height: f64,
    segments: usize,
    rings: usize,
) -> SurfaceMesh {
    assert!(wall > 0.0 && wall < outer_radius);
    assert!(segments >= 3 && rings >= 1);
    let inner_radius = outer_radius - wall;
    let mut vertices = Vec::with_capacity(2 * segments * (rings + 1));
    for v in 0..=rings {
        let z = height * v as f64 / rings as f64;
        for s in 0..segments {
            let theta = std::f64::consts::TAU * s as f64 / segments as f64;
            vertices.push(Point3::new(
                outer_radius * theta.cos(),
                outer_radius * theta.sin(),
                z,
            ));
        }
    }
    let inner_base = vertices.len();
    for v in 0..=rings {
        let z = height * v as f64 / rings as f64;
        for s in 0..segments {
            let theta = std::f64::consts::TAU * s as f64 / segments as f64;
            vertices.push(Point3::new(
                inner_radius * theta.cos(),
                inner_radius * theta.sin(),
                z,
            ));
        }
    }
    let outer = |s: usize, v: usize| v * segments + (s % segments);
    let inner = |s: usize, v: usize| inner_base + v * segments + (s % segments);

    let mut faces = Vec::new();
    let mut quad = |a: usize, b: usize, c: usize, d: usize| {
        faces.push([a, b, c]);
        faces.push([a, c, d]);
    };
    for v in 0..rings {
        for s in 0..segments {
            // outer wall, normal radially outward
            quad(outer(s, v), outer(s + 1, v), outer(s + 1, v + 1), outer(s, v + 1));
            // inner wall, normal toward the axis
            quad(inner(s, v), inner(s, v + 1), inner(s + 1, v + 1), inner(s + 1, v));
        }
    }
    for s in 0..segments {
        // top cap annulus (+z)
        quad(
            outer(s, rings),
            outer(s + 1, rings),
            inner(s + 1, rings),
            inner(s, rings),
        );
        // bottom cap annulus (-z)
        quad(outer(s, 0), inner(s, 0), inner(s + 1, 0), outer(s + 1, 0));
    }
    SurfaceMesh::new(vertices, faces, None).unwrap()
}

/// Extract the boundary surface of a voxel solid as a watertight triangle
/// mesh. `occupied` is queried on integer cell coordinates; `bounds` is the
/// inclusive cell range to scan.
pub fn voxel_solid_surface(
    origin: Point3<f64>,
    cell: f64,
    bounds: ([i64; 3], [i64; 3]),
    occupied: impl Fn(i64, i64, i64) -> bool,
) -> SurfaceMesh {
    let (lo, hi) = bounds;
    let mut index: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut corner = |i: i64, j: i64, k: i64| -> usize {
        *index.entry((i, j, k)).or_insert_with(|| {
            vertices.push(Point3::new(
                origin.x + cell * i as f64,
                origin.y + cell * j as f64,
                origin.z + cell * k as f64,
            ));
            vertices.len() - 1
        })
    };

    // For each occupied cell, emit a quad on every side facing an empty cell.
    // Quad corners are listed counterclockwise seen from outside; the split
    // diagonal alternates with corner parity so neighboring faces stay
    // compatible.
    for i in lo[0]..=hi[0] {
        for j in lo[1]..=hi[1] {
            for k in lo[2]..=hi[2] {
                if !occupied(i, j, k) {
                    continue;
                }
                let sides: [([i64; 3], [[i64; 3]; 4]); 6] = [
                    (
                        [-1, 0, 0],
                        [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]],
                    ),
                    (
                        [1, 0, 0],
                        [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]],
                    ),
                    (
                        [0, -1, 0],
                        [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]],
                    ),
                    (
                        [0, 1, 0],
                        [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]],
                    ),
                    (
                        [0, 0, -1],
                        [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]],
                    ),
                    (
                        [0, 0, 1],
                        [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
                    ),
                ];
                for (dir, quad) in sides {
                    if occupied(i + dir[0], j + dir[1], k + dir[2]) {
                        continue;
                    }
                    let ids: Vec<usize> = quad
                        .iter()
                        .map(|c| corner(i + c[0], j + c[1], k + c[2]))
                        .collect();
                    let parity = |c: &[i64; 3]| (i + c[0] + j + c[1] + k + c[2]).rem_euclid(2);
                    if parity(&quad[0]) == 0 {
                        faces.push([ids[0], ids[1], ids[2]]);
                        faces.push([ids[0], ids[2], ids[3]]);
                    } else {
                        faces.push([ids[1], ids[2], ids[3]]);
                        faces.push([ids[1], ids[3], ids[0]]);
                    }
                }
            }
        }
    }
    SurfaceMesh::new(vertices, faces, None).unwrap()
}

/// Canonical 0.1 x 0.008 x 0.008 m beam. At the 4 mm reference voxel size it
/// tetrahedralizes into exactly 25 x 2 x 2 voxels = 500 elements.
pub fn beam() -> SurfaceMesh {
    box_mesh(
        Point3::origin(),
        Vector3::new(0.1, 0.008, 0.008),
        [25, 2, 2],
    )
}

/// Reference voxel size (m) the blocky fixtures are aligned to.
pub const FIXTURE_CELL: f64 = 0.004;

/// Thin-wall regression model: a heavy block carried by a thin upright wall on
/// a wide base. Dropped on its base, the wall carries the block's inertial
/// load, so thinning the wall raises its stress sharply while the rest of the
/// model stays far from critical. Dimensions are multiples of [`FIXTURE_CELL`]
/// so the surface lies exactly on the reference voxel lattice.
///
/// Cell layout (4 mm cells): base 15x14x3, wall 3x10x12, block 10x10x6.
pub fn thin_wall_model() -> SurfaceMesh {
    let in_base = |i: i64, j: i64, k: i64| (0..15).contains(&i) && (0..14).contains(&j) && (0..3).contains(&k);
    let in_wall = |i: i64, j: i64, k: i64| (6..9).contains(&i) && (2..12).contains(&j) && (3..15).contains(&k);
    let in_block =
        |i: i64, j: i64, k: i64| (2..12).contains(&i) && (2..12).contains(&j) && (15..21).contains(&k);
    voxel_solid_surface(
        Point3::origin(),
        FIXTURE_CELL,
        ([-1, -1, -1], [16, 15, 22]),
        |i, j, k| in_base(i, j, k) || in_wall(i, j, k) || in_block(i, j, k),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{enclosed_volume, is_closed};
    use approx::assert_relative_eq;

    #[test]
    fn primitives_are_closed_and_positively_oriented() {
        let shapes: Vec<(SurfaceMesh, f64)> = vec![
            (unit_cube(), 1.0),
            (
                box_mesh(Point3::origin(), Vector3::new(2.0, 1.0, 0.5), [4, 2, 1]),
                1.0,
            ),
            (icosphere(1.0, 2), 4.0 / 3.0 * std::f64::consts::PI),
            (
                tube(0.025, 0.003, 0.04, 24, 8),
                std::f64::consts::PI * (0.025f64.powi(2) - 0.022f64.powi(2)) * 0.04,
            ),
            (beam(), 0.1 * 0.008 * 0.008),
            (thin_wall_model(), {
                let c = FIXTURE_CELL.powi(3);
                ((15 * 14 * 3) + (3 * 10 * 12) + (10 * 10 * 6)) as f64 * c
            }),
        ];
        for (mesh, expected_volume) in shapes {
            assert!(is_closed(&mesh));
            let vol = enclosed_volume(&mesh);
            assert!(vol > 0.0);
            // icosphere volume is below the analytic ball volume; others exact
            assert!(
                vol <= expected_volume * 1.0 + 1e-12 && vol >= expected_volume * 0.85,
                "volume {vol} vs expected {expected_volume}"
            );
        }
    }

    #[test]
    fn icosphere_vertices_on_radius() {
        let s = icosphere(0.73, 3);
        for p in s.vertices() {
            assert_relative_eq!(p.coords.norm(), 0.73, epsilon = 1e-12);
        }
    }

    #[test]
    fn icosphere_has_antipodes() {
        let s = icosphere(1.0, 2);
        for p in s.vertices().iter().take(20) {
            let anti = -p.coords;
            let found = s
                .vertices()
                .iter()
                .any(|q| (q.coords - anti).norm() < 1e-9);
            assert!(found);
        }
    }
}
