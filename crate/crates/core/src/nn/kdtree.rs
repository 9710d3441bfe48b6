//! Balanced k-d tree with bucket leaves.
//!
//! Splits the widest dimension at the median, so the tree is deterministic
//! for a given point order. Queries keep candidates in a bounded max-heap
//! keyed by `(squared distance, source index)`; a subtree is pruned only
//! when its minimum possible squared distance strictly exceeds the worst
//! retained candidate, which preserves the ascending-index tie rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{squared_distance, PointSet};

const BUCKET_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Split { dim: usize, val: f64, right: usize },
    Leaf { start: usize, count: usize },
}

#[derive(Debug)]
pub(super) struct KdTree {
    nodes: Vec<Node>,
    /// Point coordinates in leaf order, row-major.
    flat: Vec<f64>,
    /// Source index of each reordered point.
    source: Vec<usize>,
    dim: usize,
}

#[derive(Debug, PartialEq)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .partial_cmp(&other.d2)
            .expect("distances are finite")
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub(super) fn build(points: &PointSet) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut tree = KdTree {
            nodes: Vec::new(),
            flat: Vec::with_capacity(points.len() * points.dim()),
            source: Vec::with_capacity(points.len()),
            dim: points.dim(),
        };
        tree.build_node(points, &mut order);
        tree
    }

    fn build_node(&mut self, points: &PointSet, order: &mut [usize]) -> usize {
        let pos = self.nodes.len();
        if order.len() <= BUCKET_SIZE {
            let start = self.source.len();
            for &i in order.iter() {
                self.source.push(i);
                self.flat.extend_from_slice(points.point(i));
            }
            self.nodes.push(Node::Leaf { start, count: order.len() });
            return pos;
        }

        let dim = widest_dimension(points, order);
        let mid = order.len() / 2;
        // Median by (coordinate, source index): a deterministic partition in
        // which the left half has coordinate <= split value and the right
        // half >= it, as the search bound assumes.
        order.select_nth_unstable_by(mid, |&a, &b| {
            points.point(a)[dim]
                .partial_cmp(&points.point(b)[dim])
                .expect("coordinates are finite")
                .then(a.cmp(&b))
        });
        let val = points.point(order[mid])[dim];

        self.nodes.push(Node::Split { dim, val, right: usize::MAX });
        let (left, right) = order.split_at_mut(mid);
        let left_pos = self.build_node(points, left);
        debug_assert_eq!(left_pos, pos + 1);
        let right_pos = self.build_node(points, right);
        match &mut self.nodes[pos] {
            Node::Split { right, .. } => *right = right_pos,
            Node::Leaf { .. } => unreachable!(),
        }
        pos
    }

    /// Returns the `k_eff` nearest `(squared distance, source index)` pairs
    /// in unspecified order; `k_eff` must be in `1..=n`.
    pub(super) fn query(&self, _points: &PointSet, x: &[f64], k_eff: usize) -> Vec<(f64, usize)> {
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k_eff + 1);
        let mut off = vec![0.0; self.dim];
        self.recurse(0, x, &mut off, k_eff, &mut heap);
        heap.into_iter().map(|c| (c.d2, c.index)).collect()
    }

    fn recurse(&self, node: usize, x: &[f64], off: &mut [f64], k_eff: usize, heap: &mut BinaryHeap<Candidate>) {
        match &self.nodes[node] {
            Node::Leaf { start, count } => {
                for slot in *start..*start + *count {
                    let p = &self.flat[slot * self.dim..(slot + 1) * self.dim];
                    let cand = Candidate { d2: squared_distance(x, p), index: self.source[slot] };
                    if heap.len() < k_eff {
                        heap.push(cand);
                    } else if &cand < heap.peek().expect("heap nonempty") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split { dim, val, right } => {
                let delta = x[*dim] - val;
                let (near, far) = if delta < 0.0 { (node + 1, *right) } else { (*right, node + 1) };
                self.recurse(near, x, off, k_eff, heap);

                let old = off[*dim];
                off[*dim] = delta;
                // Exact lower bound on any squared distance in the far
                // region; summed fresh to avoid incremental drift.
                let rd: f64 = off.iter().map(|o| o * o).sum();
                let explore = match heap.peek() {
                    Some(worst) if heap.len() == k_eff => rd <= worst.d2,
                    _ => true,
                };
                if explore {
                    self.recurse(far, x, off, k_eff, heap);
                }
                off[*dim] = old;
            }
        }
    }
}

fn widest_dimension(points: &PointSet, order: &[usize]) -> usize {
    let dim = points.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &i in order {
        let p = points.point(i);
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut best = 0;
    let mut best_span = f64::NEG_INFINITY;
    for d in 0..dim {
        let span = hi[d] - lo[d];
        if span > best_span {
            best_span = span;
            best = d;
        }
    }
    best
}
