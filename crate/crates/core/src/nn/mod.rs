//! Exact nearest-neighbor search over a fixed point set.
//!
//! Two interchangeable backends answer the same queries: a k-d tree for
//! low-dimensional data and a brute-force scan that doubles as the oracle
//! in tests. Both order neighbors by `(distance, index)`, so results are
//! fully deterministic and identical across backends.

mod kdtree;

use crate::error::{Error, Result};
use kdtree::KdTree;

/// Above this ambient dimension the spatial index degrades to a linear scan
/// per query anyway, so `IndexMode::Spatial` silently builds a brute-force
/// backend instead.
pub const SPATIAL_DIM_LIMIT: usize = 30;

/// Immutable matrix of feature vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    len: usize,
    dim: usize,
}

impl PointSet {
    /// Builds a point set from row vectors. All rows must share one
    /// dimension `>= 1` and there must be at least one row.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("point set".into()));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(PointSet { data, len: rows.len(), dim })
    }

    /// Builds a point set from a flat row-major buffer.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "flat buffer of length {} is not a nonempty multiple of dim {}",
                data.len(),
                dim
            )));
        }
        let len = data.len() / dim;
        Ok(PointSet { data, len, dim })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Row-major view of the whole matrix.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// New point set holding `indices` rows in order.
    pub fn gather(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("index list".into()));
        }
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Ok(PointSet { data, len: indices.len(), dim: self.dim })
    }
}

/// Squared Euclidean distance, summed in coordinate order so that every
/// code path computes bit-identical values.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let diff = a[i] - b[i];
        acc += diff * diff;
    }
    acc
}

/// Result of a k-nearest-neighbor query.
///
/// Indices refer to the source point set and are ordered by nondecreasing
/// distance; exact distance ties are broken by ascending index. When the
/// requested `k` exceeds the number of points the list is clamped to all
/// points and `clamped` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    pub clamped: bool,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Backend selection for [`NNIndex::build`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    /// k-d tree; falls back to brute force above [`SPATIAL_DIM_LIMIT`].
    Spatial,
    /// Linear scan over all points.
    Brute,
}

#[derive(Debug)]
enum Backend {
    Brute,
    Tree(KdTree),
}

/// Query structure answering exact k-NN queries over one [`PointSet`].
///
/// Immutable after build; concurrent read-only queries are safe.
#[derive(Debug)]
pub struct NNIndex {
    points: PointSet,
    backend: Backend,
}

impl NNIndex {
    /// Builds an index over `points`.
    pub fn build(points: PointSet, mode: IndexMode) -> Result<Self> {
        Self::build_with_dim_limit(points, mode, SPATIAL_DIM_LIMIT)
    }

    /// As [`NNIndex::build`], with an explicit fallback threshold for the
    /// spatial backend.
    pub fn build_with_dim_limit(points: PointSet, mode: IndexMode, dim_limit: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point set".into()));
        }
        let backend = match mode {
            IndexMode::Brute => Backend::Brute,
            IndexMode::Spatial if points.dim() > dim_limit => Backend::Brute,
            IndexMode::Spatial => Backend::Tree(KdTree::build(&points)),
        };
        Ok(NNIndex { points, backend })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// True when queries run through the spatial partition structure.
    pub fn is_spatial(&self) -> bool {
        matches!(self.backend, Backend::Tree(_))
    }

    /// Returns the `min(k, n)` nearest neighbors of `x`.
    pub fn query_knn(&self, x: &[f64], k: usize) -> Result<NeighborList> {
        if x.len() != self.points.dim() {
            return Err(Error::DimensionMismatch { expected: self.points.dim(), got: x.len() });
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let clamped = k > self.points.len();
        let k_eff = k.min(self.points.len());
        let mut pairs = match &self.backend {
            Backend::Brute => brute_knn(&self.points, x, k_eff),
            Backend::Tree(tree) => tree.query(&self.points, x, k_eff),
        };
        pairs.sort_unstable_by(cmp_dist_index);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut distances = Vec::with_capacity(pairs.len());
        for (d2, i) in pairs {
            indices.push(i);
            distances.push(d2.sqrt());
        }
        Ok(NeighborList { indices, distances, clamped })
    }

    /// Distance from `x` to its k-th nearest neighbor (the last list entry
    /// when `k > n`).
    pub fn kth_nn_distance(&self, x: &[f64], k: usize) -> Result<f64> {
        let list = self.query_knn(x, k)?;
        Ok(*list.distances.last().expect("nonempty by construction"))
    }
}

/// Total order on `(squared distance, index)` pairs; distances compared
/// exactly, ties broken by ascending index.
#[inline]
fn cmp_dist_index(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.partial_cmp(&b.0)
        .expect("distances are finite")
        .then(a.1.cmp(&b.1))
}

fn brute_knn(points: &PointSet, x: &[f64], k_eff: usize) -> Vec<(f64, usize)> {
    let mut pairs: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(x, p), i))
        .collect();
    if k_eff < pairs.len() {
        pairs.select_nth_unstable_by(k_eff - 1, cmp_dist_index);
        pairs.truncate(k_eff);
    }
    pairs
}
