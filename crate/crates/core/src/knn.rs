//! k-NN regression estimate, the induced classifier, and the uniform bound
//! on k-th nearest-neighbor distances.

use crate::error::{Error, Result};
use crate::nn::{IndexMode, NNIndex, NeighborList, PointSet};

/// Labels accompanying a point set: class indices in `0..num_classes` or
/// real-valued regression targets.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelSet {
    Classification { labels: Vec<usize>, num_classes: usize },
    Regression { targets: Vec<f64> },
}

/// Task mode carried by a [`LabelSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskMode {
    Classification,
    Regression,
}

impl LabelSet {
    /// Class labels; requires `num_classes >= 2` and every label within range.
    pub fn classification(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("label set".into()));
        }
        if num_classes < 2 {
            return Err(Error::InvalidArgument("need at least 2 classes".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(LabelSet::Classification { labels, num_classes })
    }

    /// Real-valued targets.
    pub fn regression(targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Empty("label set".into()));
        }
        Ok(LabelSet::Regression { targets })
    }

    pub fn len(&self) -> usize {
        match self {
            LabelSet::Classification { labels, .. } => labels.len(),
            LabelSet::Regression { targets } => targets.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> TaskMode {
        match self {
            LabelSet::Classification { .. } => TaskMode::Classification,
            LabelSet::Regression { .. } => TaskMode::Regression,
        }
    }

    pub fn num_classes(&self) -> Option<usize> {
        match self {
            LabelSet::Classification { num_classes, .. } => Some(*num_classes),
            LabelSet::Regression { .. } => None,
        }
    }

    /// New label set holding `indices` entries in order.
    pub fn gather(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("index list".into()));
        }
        Ok(match self {
            LabelSet::Classification { labels, num_classes } => LabelSet::Classification {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                num_classes: *num_classes,
            },
            LabelSet::Regression { targets } => LabelSet::Regression {
                targets: indices.iter().map(|&i| targets[i]).collect(),
            },
        })
    }
}

/// Estimated (or true) vector of conditional class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("probability vector".into()));
        }
        if entries.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) {
            return Err(Error::InvalidArgument("entries must lie in [0, 1]".into()));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("entries sum to {sum}, not 1")));
        }
        Ok(ProbVector { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the largest entry; exact ties go to the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.entries.iter().enumerate().skip(1) {
            if p > self.entries[best] {
                best = i;
            }
        }
        best
    }

    /// Largest entry value.
    pub fn top(&self) -> f64 {
        self.entries[self.argmax()]
    }

    /// Gap between the largest and second-largest entries.
    pub fn margin(&self) -> f64 {
        let top = self.argmax();
        let second = self
            .entries
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != top)
            .map(|(_, &p)| p)
            .fold(f64::NEG_INFINITY, f64::max);
        self.entries[top] - second
    }
}

/// k-NN predictor: an index, its labels and the neighborhood size.
///
/// Immutable after construction; concurrent evaluation is read-only.
#[derive(Debug)]
pub struct KnnModel {
    index: NNIndex,
    labels: LabelSet,
    k: usize,
}

impl KnnModel {
    /// Builds the model; `k` is clamped to the sample size.
    pub fn new(points: PointSet, labels: LabelSet, k: usize, mode: IndexMode) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let k = k.min(points.len());
        let index = NNIndex::build(points, mode)?;
        Ok(KnnModel { index, labels, k })
    }

    pub fn index(&self) -> &NNIndex {
        &self.index
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn mode(&self) -> TaskMode {
        self.labels.mode()
    }

    fn neighbors(&self, x: &[f64]) -> Result<NeighborList> {
        self.index.query_knn(x, self.k)
    }

    /// Fraction of the k nearest neighbors carrying each class label.
    pub fn regress(&self, x: &[f64]) -> Result<ProbVector> {
        let neighbors = self.neighbors(x)?;
        self.regress_from_neighbors(&neighbors.indices)
    }

    /// As [`KnnModel::regress`], reusing an already-computed neighbor set.
    pub fn regress_from_neighbors(&self, neighbor_indices: &[usize]) -> Result<ProbVector> {
        let (labels, num_classes) = match &self.labels {
            LabelSet::Classification { labels, num_classes } => (labels, *num_classes),
            LabelSet::Regression { .. } => {
                return Err(Error::ModeMismatch(
                    "regress requires classification labels; use regress_value".into(),
                ))
            }
        };
        let mut counts = vec![0usize; num_classes];
        for &i in neighbor_indices {
            counts[labels[i]] += 1;
        }
        let k = neighbor_indices.len() as f64;
        ProbVector::new(counts.into_iter().map(|c| c as f64 / k).collect())
    }

    /// Arithmetic mean of the k nearest regression targets.
    pub fn regress_value(&self, x: &[f64]) -> Result<f64> {
        let neighbors = self.neighbors(x)?;
        self.regress_value_from_neighbors(&neighbors.indices)
    }

    /// As [`KnnModel::regress_value`], reusing a neighbor set.
    pub fn regress_value_from_neighbors(&self, neighbor_indices: &[usize]) -> Result<f64> {
        let targets = match &self.labels {
            LabelSet::Regression { targets } => targets,
            LabelSet::Classification { .. } => {
                return Err(Error::ModeMismatch(
                    "regress_value requires regression targets; use regress".into(),
                ))
            }
        };
        let sum: f64 = neighbor_indices.iter().map(|&i| targets[i]).sum();
        Ok(sum / neighbor_indices.len() as f64)
    }

    /// Class with the largest estimated probability; ties go to the
    /// smallest label index.
    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        Ok(self.regress(x)?.argmax())
    }
}

/// Parameters of the theoretical nearest-neighbor distance bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    /// VC dimension of the ball class; `D + 2` for balls in ambient
    /// dimension `D`.
    pub vc_dim: usize,
    /// Failure probability, in `(0, 1)`.
    pub delta: f64,
    /// Ball-mass lower-bound constant: `P(B(x, r)) >= c_d * r^d`.
    pub c_d: f64,
    /// Intrinsic dimension.
    pub d: usize,
}

impl TheoryParams {
    /// Default VC dimension for Euclidean balls in `R^D`.
    pub fn vc_dim_for_balls(ambient_dim: usize) -> usize {
        ambient_dim + 2
    }
}

/// High-probability upper bound on `sup_x r_k(x)`:
/// `(3 / c_d)^(1/d) * max(k/n, (vc * ln(2n) + ln(8/delta)) / n)^(1/d)`.
pub fn rk_theoretical_bound(params: &TheoryParams, n: usize, k: usize) -> Result<f64> {
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1)".into()));
    }
    if params.c_d <= 0.0 {
        return Err(Error::InvalidArgument("c_d must be positive".into()));
    }
    if params.d == 0 {
        return Err(Error::InvalidArgument("intrinsic dimension must be >= 1".into()));
    }
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let n_f = n as f64;
    let complexity = (params.vc_dim as f64 * (2.0 * n_f).ln() + (8.0 / params.delta).ln()) / n_f;
    let inner = (k as f64 / n_f).max(complexity);
    let inv_d = 1.0 / params.d as f64;
    Ok((3.0 / params.c_d).powf(inv_d) * inner.powf(inv_d))
}
