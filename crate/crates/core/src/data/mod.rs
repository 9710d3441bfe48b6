//! Dataset container, per-coordinate standardization and train/test
//! splitting.

pub mod csv;
pub mod synth;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::knn::{LabelSet, ProbVector, TaskMode};
use crate::nn::PointSet;

/// Ground truth attached to synthetic data.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    /// Conditional class probabilities and the Bayes label per point.
    Classification { eta: Vec<ProbVector>, bayes_labels: Vec<usize> },
    /// Conditional mean per point and the noise standard deviation.
    Regression { mean: Vec<f64>, noise_sigma: f64 },
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        match self {
            GroundTruth::Classification { eta, .. } => eta.len(),
            GroundTruth::Regression { mean, .. } => mean.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Points with labels, an optional ground truth, and the original class
/// names for classification data loaded from text.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub points: PointSet,
    pub labels: LabelSet,
    pub truth: Option<GroundTruth>,
    /// Original label strings in dense-label order (first appearance).
    pub class_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(points: PointSet, labels: LabelSet) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        Ok(LabeledDataset { points, labels, truth: None, class_names: None })
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

    pub fn mode(&self) -> TaskMode {
        self.labels.mode()
    }

    /// Rows of the dataset selected by `indices`, truth carried along.
    pub fn gather(&self, indices: &[usize]) -> Result<Self> {
        let truth = match &self.truth {
            None => None,
            Some(GroundTruth::Classification { eta, bayes_labels }) => {
                Some(GroundTruth::Classification {
                    eta: indices.iter().map(|&i| eta[i].clone()).collect(),
                    bayes_labels: indices.iter().map(|&i| bayes_labels[i]).collect(),
                })
            }
            Some(GroundTruth::Regression { mean, noise_sigma }) => Some(GroundTruth::Regression {
                mean: indices.iter().map(|&i| mean[i]).collect(),
                noise_sigma: *noise_sigma,
            }),
        };
        Ok(LabeledDataset {
            points: self.points.gather(indices)?,
            labels: self.labels.gather(indices)?,
            truth,
            class_names: self.class_names.clone(),
        })
    }
}

/// Per-column statistics fitted on a training set. Zero-variance columns
/// keep `std = 0` and are transformed by the shift alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Fits column means and population standard deviations.
    pub fn fit(points: &PointSet) -> Self {
        let n = points.len() as f64;
        let dim = points.dim();
        let mut means = vec![0.0; dim];
        for row in points.iter() {
            for (m, &v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; dim];
        for row in points.iter() {
            for (s, (&v, &m)) in vars.iter_mut().zip(row.iter().zip(&means)) {
                let d = v - m;
                *s += d * d;
            }
        }
        let stds = vars.iter().map(|v| (v / n).sqrt()).collect();
        Standardizer { means, stds }
    }

    /// Applies the fitted transform to a point set of the same dimension.
    pub fn transform(&self, points: &PointSet) -> Result<PointSet> {
        if points.dim() != self.means.len() {
            return Err(Error::DimensionMismatch { expected: self.means.len(), got: points.dim() });
        }
        let mut data = Vec::with_capacity(points.len() * points.dim());
        for row in points.iter() {
            for (j, &v) in row.iter().enumerate() {
                let centered = v - self.means[j];
                data.push(if self.stds[j] > 0.0 { centered / self.stds[j] } else { centered });
            }
        }
        PointSet::from_flat(data, points.dim())
    }

    /// Applies the transform to one feature vector.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.means.len() {
            return Err(Error::DimensionMismatch { expected: self.means.len(), got: row.len() });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let centered = v - self.means[j];
                if self.stds[j] > 0.0 {
                    centered / self.stds[j]
                } else {
                    centered
                }
            })
            .collect())
    }
}

/// Standardizes each coordinate of the training set to mean 0 and unit
/// population standard deviation, and transforms the test set with the
/// training statistics.
pub fn standardize(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset, Standardizer)> {
    if train.dim() != test.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), got: test.dim() });
    }
    let stats = Standardizer::fit(&train.points);
    let train_out = LabeledDataset {
        points: stats.transform(&train.points)?,
        labels: train.labels.clone(),
        truth: train.truth.clone(),
        class_names: train.class_names.clone(),
    };
    let test_out = LabeledDataset {
        points: stats.transform(&test.points)?,
        labels: test.labels.clone(),
        truth: test.truth.clone(),
        class_names: test.class_names.clone(),
    };
    Ok((train_out, test_out, stats))
}

/// Seeded disjoint shuffle-split into train and test of sizes
/// `floor(fraction * n)` and the remainder.
pub fn split(
    dataset: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument("train fraction must lie in (0, 1)".into()));
    }
    let n = dataset.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {train_fraction} leaves an empty side for n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train = dataset.gather(&order[..n_train])?;
    let test = dataset.gather(&order[n_train..])?;
    Ok((train, test))
}
