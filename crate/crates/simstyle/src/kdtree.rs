//! Minimal 3D k-d tree for nearest-neighbor queries over point sets.
//!
//! Ties on distance resolve to the lowest point index, so queries are
//! deterministic regardless of build or traversal order.

use nalgebra::Point3;

#[derive(Debug, Clone, Copy)]
struct Node {
    point: usize,
    axis: usize,
    left: i32,
    right: i32,
}

#[derive(Debug)]
pub(crate) struct KdTree {
    points: Vec<Point3<f64>>,
    nodes: Vec<Node>,
    root: i32,
}

impl KdTree {
    pub fn build(points: &[Point3<f64>]) -> Self {
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut tree = Self {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: -1,
        };
        tree.root = tree.build_rec(&mut ids, 0);
        tree
    }

    fn build_rec(&mut self, ids: &mut [usize], depth: usize) -> i32 {
        if ids.is_empty() {
            return -1;
        }
        let axis = depth % 3;
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            self.points[a][axis]
                .partial_cmp(&self.points[b][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        let point = ids[mid];
        let slot = self.nodes.len() as i32;
        self.nodes.push(Node {
            point,
            axis,
            left: -1,
            right: -1,
        });
        // Split the borrow so the recursive calls can reuse `self`.
        let (lo, rest) = ids.split_at_mut(mid);
        let hi = &mut rest[1..];
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(hi, depth + 1);
        self.nodes[slot as usize].left = left;
        self.nodes[slot as usize].right = right;
        slot
    }

    /// Index of the nearest point and its Euclidean distance.
    /// Panics on an empty tree.
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        assert!(self.root >= 0, "nearest() on empty kd-tree");
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(self.root, query, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, node: i32, query: &Point3<f64>, best: &mut (usize, f64)) {
        if node < 0 {
            return;
        }
        let n = self.nodes[node as usize];
        let d2 = (self.points[n.point] - query).norm_squared();
        if d2 < best.1 || (d2 == best.1 && n.point < best.0) {
            *best = (n.point, d2);
        }
        let delta = query[n.axis] - self.points[n.point][n.axis];
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, query, best);
        if delta * delta <= best.1 {
            self.search(far, query, best);
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.points.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_nearest(points: &[Point3<f64>], q: &Point3<f64>) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d2 = (p - q).norm_squared();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn matches_brute_force() {
        // Cheap deterministic pseudo-random points.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let points: Vec<Point3<f64>> = (0..500)
            .map(|_| Point3::new(next(), next(), next()))
            .collect();
        let tree = KdTree::build(&points);
        assert_eq!(tree.len(), 500);
        for _ in 0..200 {
            let q = Point3::new(next() * 2.0 - 0.5, next() * 2.0 - 0.5, next() * 2.0 - 0.5);
            let (bi, bd) = brute_nearest(&points, &q);
            let (ti, td) = tree.nearest(&q);
            assert_eq!(bi, ti);
            assert!((bd - td).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let points = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
        ];
        let tree = KdTree::build(&points);
        let (i, _) = tree.nearest(&Point3::new(1.0, 0.0, 0.0));
        assert_eq!(i, 0);
    }
}
