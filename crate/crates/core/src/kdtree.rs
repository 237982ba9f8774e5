//! kd-tree with exact closed-ball radius queries.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::points::{distance, Points};

/// Maximum number of points held by a leaf.
pub const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    /// Points on the left have `coord[axis] <= value`, on the right `>= value`.
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        start: usize,
        end: usize,
    },
}

/// Immutable kd-tree over a point list.
///
/// Built by median splits on the axis of widest spread. Queries return
/// indices into the original point list.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    /// Coordinates in tree order.
    coords: Vec<f64>,
    /// Original index of each point in tree order.
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

impl SpatialIndex {
    pub fn build(points: &Points) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        let dim = points.dim();
        let n = points.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build_node(points, &mut order, 0, n, &mut nodes);

        let mut coords = Vec::with_capacity(n * dim);
        for &i in &order {
            coords.extend_from_slice(points.point(i));
        }
        Ok(SpatialIndex { dim, coords, ids: order, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Sorted indices of all points with `‖x − center‖₂ ≤ r`.
    pub fn query_radius(&self, center: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_radius(center, r, |id| out.push(id));
        out.sort_unstable();
        out
    }

    /// Number of points with `‖x − center‖₂ ≤ r`.
    pub fn count_radius(&self, center: &[f64], r: f64) -> usize {
        let mut n = 0;
        self.visit_radius(center, r, |_| n += 1);
        n
    }

    fn visit_radius(&self, center: &[f64], r: f64, mut emit: impl FnMut(usize)) {
        debug_assert_eq!(center.len(), self.dim);
        if r.is_nan() || r < 0.0 {
            return;
        }
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(node) = stack.pop() {
            match self.nodes[node] {
                Node::Leaf { start, end } => {
                    for pos in start..end {
                        let p = &self.coords[pos * self.dim..(pos + 1) * self.dim];
                        if distance(p, center) <= r {
                            emit(self.ids[pos]);
                        }
                    }
                }
                Node::Split { axis, value, left, right } => {
                    // One-axis gaps bound the full distance from below, so
                    // pruning on them never drops a point inside the ball.
                    let gap = center[axis] - value;
                    if gap <= r {
                        stack.push(left);
                    }
                    if -gap <= r {
                        stack.push(right);
                    }
                }
            }
        }
    }
}

fn build_node(points: &Points, order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    let count = end - start;
    if count <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut order[start..end];
    let axis = widest_axis(points, slice);
    let mid = count / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| points.point(a)[axis].total_cmp(&points.point(b)[axis]));
    let value = points.point(slice[mid])[axis];

    nodes.push(Node::Leaf { start: 0, end: 0 });
    let left = build_node(points, order, start, start + mid, nodes);
    let right = build_node(points, order, start + mid, end, nodes);
    nodes[id] = Node::Split { axis, value, left, right };
    id
}

fn widest_axis(points: &Points, ids: &[usize]) -> usize {
    let dim = points.dim();
    let mut best = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for k in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in ids {
            let v = points.point(i)[k];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best = k;
        }
    }
    best
}
