//! Voxel-lattice tetrahedralization.
//!
//! Interior voxels (classified by parity ray casting of their centers with a
//! 3-axis majority vote) are each split into 5 tetrahedra with an alternating
//! split so neighboring voxels share face diagonals. The grid origin sits at
//! the mesh bounding-box minimum, making the result deterministic for a given
//! mesh and voxel size.

use std::collections::HashMap;

use nalgebra::Point3;

use super::{TetError, TetMesh};
use crate::mesh::SurfaceMesh;

/// Fraction of candidate voxels allowed to have disagreeing axis votes before
/// the mesh is declared unclassifiable (open or self-intersecting).
const MAX_INCONSISTENT_FRACTION: f64 = 0.25;

/// Local cube-corner index: dx + 2*dy + 4*dz.
/// Split used for voxels with even (i+j+k): central tet on even-parity
/// corners, one corner tet per odd corner.
const EVEN_SPLIT: [[usize; 4]; 5] = [
    [0, 3, 5, 6],
    [1, 0, 3, 5],
    [2, 0, 3, 6],
    [4, 0, 5, 6],
    [7, 3, 5, 6],
];
/// Mirrored split for odd voxels.
const ODD_SPLIT: [[usize; 4]; 5] = [
    [1, 2, 4, 7],
    [0, 1, 2, 4],
    [3, 1, 2, 7],
    [5, 1, 4, 7],
    [6, 2, 4, 7],
];

pub fn voxel_tetrahedralize(mesh: &SurfaceMesh, voxel_size: f64) -> Result<TetMesh, TetError> {
    if !(voxel_size > 0.0) {
        return Err(TetError::BadVoxelSize(voxel_size));
    }
    let (lo, hi) = mesh.bbox();
    let extent = hi - lo;
    let dims: [usize; 3] = std::array::from_fn(|a| ((extent[a] / voxel_size).ceil() as usize).max(1));

    // One inside/outside vote per axis per voxel.
    let mut votes = vec![0u8; dims[0] * dims[1] * dims[2]];
    let idx = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
    let bbox_mid = [
        0.5 * (lo.x + hi.x),
        0.5 * (lo.y + hi.y),
        0.5 * (lo.z + hi.z),
    ];
    for axis in 0..3 {
        vote_axis(
            mesh,
            axis,
            &lo.coords.into(),
            &bbox_mid,
            voxel_size,
            &dims,
            &mut votes,
            &idx,
        );
    }

    let mut candidates = 0usize;
    let mut inconsistent = 0usize;
    for &v in &votes {
        let n = v.count_ones();
        if n > 0 {
            candidates += 1;
            if n < 3 {
                inconsistent += 1;
            }
        }
    }
    if candidates > 0 && (inconsistent as f64) > MAX_INCONSISTENT_FRACTION * candidates as f64 {
        return Err(TetError::OpenMesh {
            inconsistent,
            candidates,
        });
    }

    // Emit 5 tets per interior voxel, welding lattice corners.
    let mut corner_ids: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut nodes: Vec<Point3<f64>> = Vec::new();
    let mut tets: Vec<[usize; 4]> = Vec::new();
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                if votes[idx(i, j, k)].count_ones() < 2 {
                    continue;
                }
                let mut corner = [0usize; 8];
                for (c, slot) in corner.iter_mut().enumerate() {
                    let (di, dj, dk) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
                    let key = (i + di, j + dj, k + dk);
                    *slot = *corner_ids.entry(key).or_insert_with(|| {
                        nodes.push(Point3::new(
                            lo.x + voxel_size * key.0 as f64,
                            lo.y + voxel_size * key.1 as f64,
                            lo.z + voxel_size * key.2 as f64,
                        ));
                        nodes.len() - 1
                    });
                }
                let split = if (i + j + k) % 2 == 0 {
                    &EVEN_SPLIT
                } else {
                    &ODD_SPLIT
                };
                for t in split {
                    tets.push([corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]]);
                }
            }
        }
    }
    if tets.is_empty() {
        return Err(TetError::Resolution(voxel_size));
    }
    TetMesh::new(nodes, tets)
}

/// Cast one ray per voxel column along `axis`, record triangle crossings, and
/// set the axis vote for every voxel whose center has odd parity.
///
/// Column sample points are nudged toward the mesh bounding-box center by two
/// distinct tiny fractions of the voxel size. That keeps lattice-aligned
/// geometry (very common in printable models) away from exact edge and vertex
/// hits, and the distinct magnitudes keep samples off face diagonals.
#[allow(clippy::too_many_arguments)]
fn vote_axis(
    mesh: &SurfaceMesh,
    axis: usize,
    lo: &[f64; 3],
    bbox_mid: &[f64; 3],
    h: f64,
    dims: &[usize; 3],
    votes: &mut [u8],
    idx: &impl Fn(usize, usize, usize) -> usize,
) {
    let ua = (axis + 1) % 3;
    let va = (axis + 2) % 3;
    let (nu, nv) = (dims[ua], dims[va]);
    let eps_u = 1.3782e-4 * h;
    let eps_v = 0.7431e-4 * h;
    let mid_u = bbox_mid[ua];
    let mid_v = bbox_mid[va];
    let col_u = |cu: usize| {
        let u = lo[ua] + (cu as f64 + 0.5) * h;
        u + if u > mid_u { -eps_u } else { eps_u }
    };
    let col_v = |cv: usize| {
        let v = lo[va] + (cv as f64 + 0.5) * h;
        v + if v > mid_v { -eps_v } else { eps_v }
    };

    let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); nu * nv];
    for f in mesh.faces() {
        let p = mesh.vertices()[f[0]];
        let q = mesh.vertices()[f[1]];
        let r = mesh.vertices()[f[2]];
        let (pu, pv, pa) = (p[ua], p[va], p[axis]);
        let (qu, qv, qa) = (q[ua], q[va], q[axis]);
        let (ru, rv, ra) = (r[ua], r[va], r[axis]);
        let denom = (qu - pu) * (rv - pv) - (qv - pv) * (ru - pu);
        if denom == 0.0 {
            // Triangle parallel to the ray; the other two axes see it.
            continue;
        }
        let umin = pu.min(qu).min(ru);
        let umax = pu.max(qu).max(ru);
        let vmin = pv.min(qv).min(rv);
        let vmax = pv.max(qv).max(rv);
        let cu_lo = (((umin - lo[ua]) / h - 0.6).floor().max(0.0)) as usize;
        let cu_hi = ((((umax - lo[ua]) / h - 0.4).ceil()).max(0.0) as usize).min(nu - 1);
        let cv_lo = (((vmin - lo[va]) / h - 0.6).floor().max(0.0)) as usize;
        let cv_hi = ((((vmax - lo[va]) / h - 0.4).ceil()).max(0.0) as usize).min(nv - 1);
        for cu in cu_lo..=cu_hi {
            let u = col_u(cu);
            for cv in cv_lo..=cv_hi {
                let v = col_v(cv);
                // Edge functions; strictly interior points only.
                let s0 = (qu - pu) * (v - pv) - (qv - pv) * (u - pu);
                let s1 = (ru - qu) * (v - qv) - (rv - qv) * (u - qu);
                let s2 = (pu - ru) * (v - rv) - (pv - rv) * (u - ru);
                let inside = if denom > 0.0 {
                    s0 > 0.0 && s1 > 0.0 && s2 > 0.0
                } else {
                    s0 < 0.0 && s1 < 0.0 && s2 < 0.0
                };
                if inside {
                    // Barycentric interpolation of the axis coordinate.
                    let (lp, lq, lr) = (s1 / denom, s2 / denom, s0 / denom);
                    crossings[cu * nv + cv].push(lp * pa + lq * qa + lr * ra);
                }
            }
        }
    }

    let bit = 1u8 << axis;
    for cu in 0..nu {
        for cv in 0..nv {
            let list = &mut crossings[cu * nv + cv];
            if list.is_empty() {
                continue;
            }
            list.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let mut pointer = 0usize;
            for ia in 0..dims[axis] {
                let s = lo[axis] + (ia as f64 + 0.5) * h;
                while pointer < list.len() && list[pointer] < s {
                    pointer += 1;
                }
                if pointer % 2 == 1 {
                    let (i, j, k) = match axis {
                        0 => (ia, cu, cv),
                        1 => (cv, ia, cu),
                        _ => (cu, cv, ia),
                    };
                    votes[idx(i, j, k)] |= bit;
                }
            }
        }
    }
}
