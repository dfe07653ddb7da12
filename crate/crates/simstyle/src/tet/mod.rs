//! Tetrahedral meshes: voxel-lattice tetrahedralization, TetGen-format import,
//! boundary-surface extraction, and surface-to-tet vertex correspondence.

mod tetgen;
mod voxel;

pub use tetgen::{load_tetgen, save_tetgen};
pub use voxel::voxel_tetrahedralize;

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use crate::kdtree::KdTree;
use crate::mesh::SurfaceMesh;
use crate::par;

#[derive(Debug, Error)]
pub enum TetError {
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cannot detect index base: first index is {0} (expected 0 or 1)")]
    IndexBase(i64),
    #[error("tet {0} references node {1} but mesh has {2} nodes")]
    NodeRange(usize, usize, usize),
    #[error("tet {0} has zero volume")]
    DegenerateTet(usize),
    #[error("duplicate tet at index {0}")]
    DuplicateTet(usize),
    #[error("inside/outside classification inconsistent for {inconsistent} of {candidates} candidate voxels; is the mesh closed?")]
    OpenMesh {
        inconsistent: usize,
        candidates: usize,
    },
    #[error("no interior voxels at voxel size {0}; mesh too thin for this resolution")]
    Resolution(f64),
    #[error("voxel size must be positive, got {0}")]
    BadVoxelSize(f64),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Volumetric simulation domain: tetrahedra over a shared node set.
///
/// Construction guarantees positive element volumes (inverted input tets are
/// reoriented by an index swap), in-range indices, no duplicate elements, and
/// a precomputed boundary node set.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    nodes: Vec<Point3<f64>>,
    tets: Vec<[usize; 4]>,
    boundary_nodes: Vec<usize>,
}

fn tet_volume(nodes: &[Point3<f64>], t: &[usize; 4]) -> f64 {
    let a = nodes[t[0]];
    (nodes[t[1]] - a)
        .cross(&(nodes[t[2]] - a))
        .dot(&(nodes[t[3]] - a))
        / 6.0
}

impl TetMesh {
    pub fn new(nodes: Vec<Point3<f64>>, mut tets: Vec<[usize; 4]>) -> Result<Self, TetError> {
        let n = nodes.len();
        let mut seen = HashMap::new();
        for (ti, t) in tets.iter_mut().enumerate() {
            for &v in t.iter() {
                if v >= n {
                    return Err(TetError::NodeRange(ti, v, n));
                }
            }
            let vol = tet_volume(&nodes, t);
            if vol == 0.0 {
                return Err(TetError::DegenerateTet(ti));
            }
            if vol < 0.0 {
                t.swap(2, 3);
            }
            let mut key = *t;
            key.sort_unstable();
            if seen.insert(key, ti).is_some() {
                return Err(TetError::DuplicateTet(ti));
            }
        }
        let boundary_nodes = boundary_node_set(&tets);
        Ok(Self {
            nodes,
            tets,
            boundary_nodes,
        })
    }

    pub fn nodes(&self) -> &[Point3<f64>] {
        &self.nodes
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    /// Node indices on the exterior surface, ascending.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn volume(&self, ti: usize) -> f64 {
        tet_volume(&self.nodes, &self.tets[ti])
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|ti| self.volume(ti)).sum()
    }

    /// Shortest element edge; the explicit-integration stability bound scales
    /// with this.
    pub fn min_edge_length(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in &self.tets {
            for a in 0..3 {
                for b in a + 1..4 {
                    min = min.min((self.nodes[t[a]] - self.nodes[t[b]]).norm());
                }
            }
        }
        min
    }
}

/// Outward-oriented faces of a positively oriented tet `(a, b, c, d)`.
fn tet_faces(t: &[usize; 4]) -> [[usize; 3]; 4] {
    let [a, b, c, d] = *t;
    [[a, c, b], [a, b, d], [b, c, d], [a, d, c]]
}

fn sorted3(f: [usize; 3]) -> [usize; 3] {
    let mut s = f;
    s.sort_unstable();
    s
}

/// Faces appearing in exactly one tet, keeping their outward orientation.
fn boundary_faces(tets: &[[usize; 4]]) -> Vec<[usize; 3]> {
    let mut count: HashMap<[usize; 3], ([usize; 3], u32)> = HashMap::new();
    for t in tets {
        for f in tet_faces(t) {
            count
                .entry(sorted3(f))
                .and_modify(|e| e.1 += 1)
                .or_insert((f, 1));
        }
    }
    let mut faces: Vec<[usize; 3]> = count
        .into_values()
        .filter_map(|(f, c)| (c == 1).then_some(f))
        .collect();
    faces.sort_unstable();
    faces
}

fn boundary_node_set(tets: &[[usize; 4]]) -> Vec<usize> {
    let mut nodes: Vec<usize> = boundary_faces(tets).into_iter().flatten().collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// Boundary triangles of the tet mesh as a surface mesh, outward-oriented,
/// with boundary nodes densely reindexed in ascending node order.
pub fn extract_surface(tm: &TetMesh) -> SurfaceMesh {
    let faces = boundary_faces(&tm.tets);
    let boundary = &tm.boundary_nodes;
    let dense: HashMap<usize, usize> = boundary.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let vertices: Vec<Point3<f64>> = boundary.iter().map(|&n| tm.nodes[n]).collect();
    let faces: Vec<[usize; 3]> = faces
        .into_iter()
        .map(|f| [dense[&f[0]], dense[&f[1]], dense[&f[2]]])
        .collect();
    SurfaceMesh::new(vertices, faces, None).expect("boundary of a valid tet mesh is a valid mesh")
}

/// Surface-vertex to tet-boundary-node matching, both directions, computed in
/// unit-bounding-box normalized coordinates.
#[derive(Debug, Clone)]
pub struct Correspondence {
    /// Per surface vertex: the raw index of its nearest boundary node.
    pub surf_to_tet: Vec<usize>,
    /// Per entry of `TetMesh::boundary_nodes`: the nearest surface vertex.
    pub tet_to_surf: Vec<usize>,
    /// Largest match distance seen in either direction (normalized units).
    pub max_match_distance: f64,
}

fn normalize_unit_box(points: &[Point3<f64>]) -> Vec<Point3<f64>> {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = hi - lo;
    let scale = Vector3::new(
        if extent.x > 0.0 { 1.0 / extent.x } else { 0.0 },
        if extent.y > 0.0 { 1.0 / extent.y } else { 0.0 },
        if extent.z > 0.0 { 1.0 / extent.z } else { 0.0 },
    );
    points
        .iter()
        .map(|p| Point3::new((p.x - lo.x) * scale.x, (p.y - lo.y) * scale.y, (p.z - lo.z) * scale.z))
        .collect()
}

/// Mutual nearest-neighbor matching between two normalized point sets.
/// Returns (a_to_b, b_to_a, max distance).
pub(crate) fn match_point_sets(
    a: &[Point3<f64>],
    b: &[Point3<f64>],
) -> (Vec<usize>, Vec<usize>, f64) {
    let tree_b = KdTree::build(b);
    let tree_a = KdTree::build(a);
    let a_matches = par::map_collect(a.len(), |i| tree_b.nearest(&a[i]));
    let b_matches = par::map_collect(b.len(), |i| tree_a.nearest(&b[i]));
    let mut max_d: f64 = 0.0;
    for &(_, d) in a_matches.iter().chain(&b_matches) {
        max_d = max_d.max(d);
    }
    (
        a_matches.into_iter().map(|(i, _)| i).collect(),
        b_matches.into_iter().map(|(i, _)| i).collect(),
        max_d,
    )
}

/// Match every surface vertex with its nearest tet boundary node (k = 1) and
/// vice versa, after normalizing each model to a unit bounding box.
pub fn build_correspondence(surf: &SurfaceMesh, tm: &TetMesh) -> Correspondence {
    let surf_pts = normalize_unit_box(surf.vertices());
    let node_pts = normalize_unit_box(&tm.nodes);
    let boundary_pts: Vec<Point3<f64>> =
        tm.boundary_nodes.iter().map(|&n| node_pts[n]).collect();
    let (surf_to_boundary, tet_to_surf, max_match_distance) =
        match_point_sets(&surf_pts, &boundary_pts);
    let surf_to_tet = surf_to_boundary
        .into_iter()
        .map(|bi| tm.boundary_nodes[bi])
        .collect();
    Correspondence {
        surf_to_tet,
        tet_to_surf,
        max_match_distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{enclosed_volume, is_closed};
    use crate::shapes;
    use approx::assert_relative_eq;

    fn single_tet() -> TetMesh {
        TetMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_tet_surface() {
        let tm = single_tet();
        assert_eq!(tm.boundary_nodes(), &[0, 1, 2, 3]);
        let surf = extract_surface(&tm);
        assert_eq!(surf.face_count(), 4);
        assert!(is_closed(&surf));
        assert_relative_eq!(enclosed_volume(&surf), 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn inverted_tet_is_reoriented() {
        let tm = TetMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1, 3]],
        )
        .unwrap();
        assert!(tm.volume(0) > 0.0);
    }

    #[test]
    fn duplicate_tet_rejected() {
        let nodes = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let err = TetMesh::new(nodes, vec![[0, 1, 2, 3], [1, 0, 3, 2]]).unwrap_err();
        assert!(matches!(err, TetError::DuplicateTet(1)));
    }

    #[test]
    fn five_tet_cube_surface_is_cube_boundary() {
        // One voxel of the alternating split: 12 boundary triangles bounding
        // the full voxel volume.
        let tm = voxel_tetrahedralize(&shapes::unit_cube(), 2.0).unwrap();
        assert_eq!(tm.tet_count(), 5);
        let surf = extract_surface(&tm);
        assert_eq!(surf.face_count(), 12);
        assert!(is_closed(&surf));
        assert_relative_eq!(enclosed_volume(&surf), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_tet_surface_watertight() {
        let tm = voxel_tetrahedralize(&shapes::icosphere(1.0, 3), 0.2).unwrap();
        let surf = extract_surface(&tm);
        assert!(is_closed(&surf));
        assert!(enclosed_volume(&surf) > 0.0);
    }

    #[test]
    fn identity_correspondence_is_bijective() {
        let tm = voxel_tetrahedralize(&shapes::unit_cube(), 0.5).unwrap();
        let surf = extract_surface(&tm);
        let corr = build_correspondence(&surf, &tm);
        assert_eq!(corr.max_match_distance, 0.0);
        // tet_to_surf o surf_to_tet == identity
        let dense: HashMap<usize, usize> = tm
            .boundary_nodes()
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, i))
            .collect();
        for (v, &node) in corr.surf_to_tet.iter().enumerate() {
            assert_eq!(corr.tet_to_surf[dense[&node]], v);
        }
    }

    #[test]
    fn correspondence_distance_bounded_by_voxel() {
        let surf = shapes::icosphere(1.0, 3);
        let h = 0.2;
        let tm = voxel_tetrahedralize(&surf, h).unwrap();
        let corr = build_correspondence(&surf, &tm);
        // One voxel in normalized units, with slack for the differing bboxes.
        assert!(
            corr.max_match_distance <= 1.5 * h / 2.0,
            "distance {}",
            corr.max_match_distance
        );
    }

    #[test]
    fn single_point_sets_match_trivially() {
        let a = vec![Point3::new(0.0, 0.0, 0.0)];
        let b = vec![Point3::new(5.0, 1.0, 2.0)];
        let (ab, ba, _) = match_point_sets(&a, &b);
        assert_eq!(ab, vec![0]);
        assert_eq!(ba, vec![0]);
    }
}
