//! Denoised 1-NN submodels, the subNN ensemble, and the bagged 1-NN
//! baseline.
//!
//! A submodel holds a subsample of the training points together with labels
//! that were replaced ("denoised") by the full-data k-NN prediction at each
//! subsample point; prediction is then a 1-NN lookup in the subsample. The
//! ensemble aggregates `I` such submodels built from independently drawn
//! subsamples, by majority vote (classification) or mean (regression). The
//! bagged baseline is identical except that subsample labels are kept as-is.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::knn::{KnnModel, LabelSet, TaskMode};
use crate::nn::{IndexMode, NNIndex, PointSet};

/// Output of a single prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Label(usize),
    Value(f64),
}

impl Prediction {
    pub fn as_label(&self) -> Option<usize> {
        match self {
            Prediction::Label(l) => Some(*l),
            Prediction::Value(_) => None,
        }
    }

    pub fn as_value(&self) -> Option<f64> {
        match self {
            Prediction::Value(v) => Some(*v),
            Prediction::Label(_) => None,
        }
    }
}

/// Ensemble aggregation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Most frequent submodel label; ties go to the smallest label index.
    Majority,
    /// Arithmetic mean of submodel values.
    Mean,
}

/// Wall-clock record of one timed batch prediction.
///
/// Per-submodel durations cover that submodel's whole query batch;
/// `aggregation` covers the merge of submodel outputs.
#[derive(Debug, Clone)]
pub struct BatchTiming {
    pub per_submodel: Vec<Duration>,
    pub aggregation: Duration,
}

impl BatchTiming {
    /// Slowest submodel plus aggregation: the effective prediction time
    /// when every submodel runs on its own computing unit.
    pub fn max_rule(&self) -> Duration {
        self.per_submodel.iter().max().copied().unwrap_or_default() + self.aggregation
    }

    /// Mean over submodels plus aggregation.
    pub fn avg_rule(&self) -> Duration {
        let total: Duration = self.per_submodel.iter().sum();
        let mean = total / self.per_submodel.len().max(1) as u32;
        mean + self.aggregation
    }
}

/// Draws `m` distinct indices from `0..n` uniformly without replacement,
/// returned in ascending order.
pub fn draw_subsample(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::InvalidArgument("subsample size must be >= 1".into()));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!("subsample size {m} exceeds sample size {n}")));
    }
    let mut indices = rand::seq::index::sample(rng, n, m).into_vec();
    indices.sort_unstable();
    Ok(indices)
}

/// Per-submodel seeds derived from one master seed. Both ensemble kinds use
/// this derivation, so equal master seeds draw equal subsamples.
pub fn submodel_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

/// One 1-NN predictor over a subsample, with labels either denoised by the
/// full-data k-NN model or carried over unchanged (bagged baseline).
#[derive(Debug)]
pub struct DenoisedModel {
    sub_points: PointSet,
    labels: LabelSet,
    sub_index: NNIndex,
    source_indices: Vec<usize>,
}

impl DenoisedModel {
    /// Builds a denoised submodel: each subsample point is relabeled with
    /// the full model's k-NN prediction at that point.
    pub fn build(full: &KnnModel, indices: &[usize], mode: IndexMode) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("subsample index list".into()));
        }
        let sub_points = full.index().points().gather(indices)?;
        let labels = match full.mode() {
            TaskMode::Classification => {
                let num_classes = full.labels().num_classes().expect("classification mode");
                let mut denoised = Vec::with_capacity(indices.len());
                for p in sub_points.iter() {
                    denoised.push(full.classify(p)?);
                }
                LabelSet::classification(denoised, num_classes)?
            }
            TaskMode::Regression => {
                let mut denoised = Vec::with_capacity(indices.len());
                for p in sub_points.iter() {
                    denoised.push(full.regress_value(p)?);
                }
                LabelSet::regression(denoised)?
            }
        };
        let sub_index = NNIndex::build(sub_points.clone(), mode)?;
        Ok(DenoisedModel { sub_points, labels, sub_index, source_indices: indices.to_vec() })
    }

    /// Builds a submodel that keeps the original labels of the subsample.
    pub(crate) fn with_original_labels(
        points: &PointSet,
        labels: &LabelSet,
        indices: &[usize],
        mode: IndexMode,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("subsample index list".into()));
        }
        let sub_points = points.gather(indices)?;
        let labels = labels.gather(indices)?;
        let sub_index = NNIndex::build(sub_points.clone(), mode)?;
        Ok(DenoisedModel { sub_points, labels, sub_index, source_indices: indices.to_vec() })
    }

    /// Reassembles a submodel from persisted parts.
    pub fn from_parts(
        sub_points: PointSet,
        labels: LabelSet,
        source_indices: Vec<usize>,
        mode: IndexMode,
    ) -> Result<Self> {
        if labels.len() != sub_points.len() || source_indices.len() != sub_points.len() {
            return Err(Error::InvalidArgument("submodel part lengths disagree".into()));
        }
        let sub_index = NNIndex::build(sub_points.clone(), mode)?;
        Ok(DenoisedModel { sub_points, labels, sub_index, source_indices })
    }

    pub fn len(&self) -> usize {
        self.sub_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub_points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sub_points.dim()
    }

    pub fn mode(&self) -> TaskMode {
        self.labels.mode()
    }

    pub fn sub_points(&self) -> &PointSet {
        &self.sub_points
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// Label (or value) stored for the 1-NN of `x` within the subsample.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let nn = self.sub_index.query_knn(x, 1)?;
        let i = nn.indices[0];
        Ok(match &self.labels {
            LabelSet::Classification { labels, .. } => Prediction::Label(labels[i]),
            LabelSet::Regression { targets } => Prediction::Value(targets[i]),
        })
    }
}

/// subNN: ensemble of denoised 1-NN submodels over independent subsamples.
#[derive(Debug)]
pub struct SubNNModel {
    submodels: Vec<DenoisedModel>,
    aggregation: Aggregation,
    num_classes: Option<usize>,
    k: usize,
    seed: u64,
}

/// Bagged 1-NN baseline: same ensemble shape, original subsample labels.
#[derive(Debug)]
pub struct BaggedModel {
    submodels: Vec<DenoisedModel>,
    aggregation: Aggregation,
    num_classes: Option<usize>,
}

fn ensemble_mode_fields(labels: &LabelSet) -> (Aggregation, Option<usize>) {
    match labels.mode() {
        TaskMode::Classification => (Aggregation::Majority, labels.num_classes()),
        TaskMode::Regression => (Aggregation::Mean, None),
    }
}

impl SubNNModel {
    /// Trains `num_models` denoised submodels of size `m` from `full`,
    /// drawing subsamples with seeds derived from `seed`.
    pub fn train(
        full: &KnnModel,
        m: usize,
        num_models: usize,
        seed: u64,
        mode: IndexMode,
    ) -> Result<Self> {
        if num_models == 0 {
            return Err(Error::InvalidArgument("ensemble size must be >= 1".into()));
        }
        let n = full.len();
        let mut submodels = Vec::with_capacity(num_models);
        for sub_seed in submodel_seeds(seed, num_models) {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
            let indices = draw_subsample(n, m, &mut rng)?;
            submodels.push(DenoisedModel::build(full, &indices, mode)?);
        }
        let (aggregation, num_classes) = ensemble_mode_fields(full.labels());
        Ok(SubNNModel { submodels, aggregation, num_classes, k: full.k(), seed })
    }

    /// Reassembles an ensemble from persisted submodels.
    pub fn from_submodels(
        submodels: Vec<DenoisedModel>,
        k: usize,
        seed: u64,
    ) -> Result<Self> {
        let first = submodels.first().ok_or_else(|| Error::Empty("submodel list".into()))?;
        let (aggregation, num_classes) = ensemble_mode_fields(first.labels());
        let m = first.len();
        let dim = first.dim();
        let mode = first.mode();
        for sm in &submodels {
            if sm.len() != m || sm.dim() != dim || sm.mode() != mode {
                return Err(Error::InvalidArgument("submodels disagree on shape or mode".into()));
            }
        }
        Ok(SubNNModel { submodels, aggregation, num_classes, k, seed })
    }

    pub fn submodels(&self) -> &[DenoisedModel] {
        &self.submodels
    }

    pub fn num_models(&self) -> usize {
        self.submodels.len()
    }

    pub fn subsample_size(&self) -> usize {
        self.submodels[0].len()
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    /// Denoising parameter of the generating full-data model.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> TaskMode {
        self.submodels[0].mode()
    }

    pub fn dim(&self) -> usize {
        self.submodels[0].dim()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.num_classes
    }

    /// Aggregated prediction at one query point.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let votes = self
            .submodels
            .iter()
            .map(|sm| sm.predict(x))
            .collect::<Result<Vec<_>>>()?;
        aggregate(&votes, self.aggregation, self.num_classes)
    }

    /// Batch prediction over a query set, optionally recording wall-clock
    /// durations (one untimed warm-up pass, then per-submodel batch times
    /// plus aggregation time).
    pub fn predict_batch(
        &self,
        queries: &PointSet,
        timing: bool,
        workers: Option<usize>,
    ) -> Result<(Vec<Prediction>, Option<BatchTiming>)> {
        ensemble_predict_batch(
            &self.submodels,
            self.aggregation,
            self.num_classes,
            queries,
            timing,
            workers,
        )
    }
}

impl BaggedModel {
    /// Trains `num_models` plain 1-NN submodels over subsamples with their
    /// original labels. No denoising parameter is involved.
    pub fn train(
        points: &PointSet,
        labels: &LabelSet,
        m: usize,
        num_models: usize,
        seed: u64,
        mode: IndexMode,
    ) -> Result<Self> {
        if num_models == 0 {
            return Err(Error::InvalidArgument("ensemble size must be >= 1".into()));
        }
        if labels.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        let mut submodels = Vec::with_capacity(num_models);
        for sub_seed in submodel_seeds(seed, num_models) {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
            let indices = draw_subsample(points.len(), m, &mut rng)?;
            submodels.push(DenoisedModel::with_original_labels(points, labels, &indices, mode)?);
        }
        let (aggregation, num_classes) = ensemble_mode_fields(labels);
        Ok(BaggedModel { submodels, aggregation, num_classes })
    }

    pub fn submodels(&self) -> &[DenoisedModel] {
        &self.submodels
    }

    pub fn num_models(&self) -> usize {
        self.submodels.len()
    }

    pub fn mode(&self) -> TaskMode {
        self.submodels[0].mode()
    }

    /// Aggregated prediction at one query point.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let votes = self
            .submodels
            .iter()
            .map(|sm| sm.predict(x))
            .collect::<Result<Vec<_>>>()?;
        aggregate(&votes, self.aggregation, self.num_classes)
    }

    /// Batch prediction; see [`SubNNModel::predict_batch`].
    pub fn predict_batch(
        &self,
        queries: &PointSet,
        timing: bool,
        workers: Option<usize>,
    ) -> Result<(Vec<Prediction>, Option<BatchTiming>)> {
        ensemble_predict_batch(
            &self.submodels,
            self.aggregation,
            self.num_classes,
            queries,
            timing,
            workers,
        )
    }
}

/// Combines one vote per submodel into a single prediction.
fn aggregate(
    votes: &[Prediction],
    aggregation: Aggregation,
    num_classes: Option<usize>,
) -> Result<Prediction> {
    match aggregation {
        Aggregation::Majority => {
            let num_classes = num_classes
                .ok_or_else(|| Error::ModeMismatch("majority vote needs class count".into()))?;
            let mut counts = vec![0usize; num_classes];
            for vote in votes {
                let label = vote
                    .as_label()
                    .ok_or_else(|| Error::ModeMismatch("majority vote over values".into()))?;
                counts[label] += 1;
            }
            let mut best = 0;
            for (label, &c) in counts.iter().enumerate().skip(1) {
                if c > counts[best] {
                    best = label;
                }
            }
            Ok(Prediction::Label(best))
        }
        Aggregation::Mean => {
            let mut sum = 0.0;
            for vote in votes {
                sum += vote
                    .as_value()
                    .ok_or_else(|| Error::ModeMismatch("mean aggregation over labels".into()))?;
            }
            Ok(Prediction::Value(sum / votes.len() as f64))
        }
    }
}

/// Runs every submodel over the whole batch (one logical worker per
/// submodel unless capped), then merges votes per query in submodel-index
/// order, so the output is independent of scheduling.
fn ensemble_predict_batch(
    submodels: &[DenoisedModel],
    aggregation: Aggregation,
    num_classes: Option<usize>,
    queries: &PointSet,
    timing: bool,
    workers: Option<usize>,
) -> Result<(Vec<Prediction>, Option<BatchTiming>)> {
    let dim = submodels[0].dim();
    if queries.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: queries.dim() });
    }
    let threads = workers.unwrap_or(submodels.len()).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let run_batch = |sm: &DenoisedModel| -> Result<(Vec<Prediction>, Duration)> {
        let start = Instant::now();
        let mut preds = Vec::with_capacity(queries.len());
        for q in queries.iter() {
            preds.push(sm.predict(q)?);
        }
        Ok((preds, start.elapsed()))
    };

    if timing {
        // Warm-up pass, excluded from all reported durations.
        pool.install(|| {
            use rayon::prelude::*;
            submodels.par_iter().try_for_each(|sm| run_batch(sm).map(|_| ()))
        })?;
    }

    let per_submodel: Vec<(Vec<Prediction>, Duration)> = pool.install(|| {
        use rayon::prelude::*;
        submodels.par_iter().map(run_batch).collect::<Result<Vec<_>>>()
    })?;

    let agg_start = Instant::now();
    let mut merged = Vec::with_capacity(queries.len());
    let mut votes = vec![Prediction::Label(0); submodels.len()];
    for q in 0..queries.len() {
        for (s, (preds, _)) in per_submodel.iter().enumerate() {
            votes[s] = preds[q];
        }
        merged.push(aggregate(&votes, aggregation, num_classes)?);
    }
    let aggregation_time = agg_start.elapsed();

    let timing_record = timing.then(|| BatchTiming {
        per_submodel: per_submodel.iter().map(|(_, d)| *d).collect(),
        aggregation: aggregation_time,
    });
    Ok((merged, timing_record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::LabelSet;
    use rand::Rng;

    fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Two well-separated Gaussian blobs with labels 0/1.
    fn gaussian_mixture(rng: &mut ChaCha8Rng, n: usize) -> (PointSet, LabelSet) {
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = i % 2;
            let center = if label == 0 { -1.5 } else { 1.5 };
            let gauss = |rng: &mut ChaCha8Rng| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            };
            rows.push(vec![center + gauss(rng), gauss(rng)]);
            labels.push(label);
        }
        (PointSet::new(rows).unwrap(), LabelSet::classification(labels, 2).unwrap())
    }

    fn single_point_submodel(label: usize) -> DenoisedModel {
        let points = PointSet::new(vec![vec![0.0]]).unwrap();
        let labels = LabelSet::classification(vec![label], 3).unwrap();
        DenoisedModel::with_original_labels(&points, &labels, &[0], IndexMode::Brute).unwrap()
    }

    #[test]
    fn draw_subsample_full_set_and_errors() {
        let mut rng = seeded(0);
        assert_eq!(draw_subsample(5, 5, &mut rng).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(draw_subsample(5, 6, &mut rng).is_err());
        assert!(draw_subsample(5, 0, &mut rng).is_err());
    }

    #[test]
    fn draw_subsample_deterministic_given_seed() {
        let a = draw_subsample(10, 3, &mut seeded(77)).unwrap();
        let b = draw_subsample(10, 3, &mut seeded(77)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn draw_subsample_marginal_matches_hypergeometric() {
        // Each of 4 indices appears in a size-2 draw with probability 1/2.
        let mut rng = seeded(123);
        let mut counts = [0usize; 4];
        let draws = 10_000;
        for _ in 0..draws {
            for i in draw_subsample(4, 2, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.5).abs() < 0.02, "marginal frequency {freq} off from 0.5");
        }
    }

    #[test]
    fn denoised_build_rejects_empty_indices() {
        let mut rng = seeded(1);
        let (points, labels) = gaussian_mixture(&mut rng, 20);
        let full = KnnModel::new(points, labels, 3, IndexMode::Spatial).unwrap();
        assert!(DenoisedModel::build(&full, &[], IndexMode::Spatial).is_err());
    }

    #[test]
    fn denoised_full_subsample_predicts_knn_at_training_points() {
        let mut rng = seeded(2);
        let (points, labels) = gaussian_mixture(&mut rng, 40);
        let full = KnnModel::new(points.clone(), labels, 5, IndexMode::Spatial).unwrap();
        let indices: Vec<usize> = (0..points.len()).collect();
        let sub = DenoisedModel::build(&full, &indices, IndexMode::Spatial).unwrap();
        for j in 0..points.len() {
            let x = points.point(j);
            assert_eq!(
                sub.predict(x).unwrap(),
                Prediction::Label(full.classify(x).unwrap())
            );
        }
    }

    #[test]
    fn k1_denoising_is_the_identity() {
        let mut rng = seeded(3);
        let (points, labels) = gaussian_mixture(&mut rng, 30);
        let full = KnnModel::new(points, labels.clone(), 1, IndexMode::Spatial).unwrap();
        let mut draw_rng = seeded(4);
        let indices = draw_subsample(30, 10, &mut draw_rng).unwrap();
        let sub = DenoisedModel::build(&full, &indices, IndexMode::Spatial).unwrap();
        let original = match &labels {
            LabelSet::Classification { labels, .. } => labels.clone(),
            _ => unreachable!(),
        };
        let denoised = match sub.labels() {
            LabelSet::Classification { labels, .. } => labels.clone(),
            _ => unreachable!(),
        };
        let expected: Vec<usize> = indices.iter().map(|&i| original[i]).collect();
        assert_eq!(denoised, expected);
    }

    #[test]
    fn denoised_labels_agree_with_per_point_classify() {
        let mut rng = seeded(5);
        let (points, labels) = gaussian_mixture(&mut rng, 200);
        let full = KnnModel::new(points.clone(), labels, 15, IndexMode::Spatial).unwrap();
        let mut draw_rng = seeded(6);
        let indices = draw_subsample(200, 50, &mut draw_rng).unwrap();
        let sub = DenoisedModel::build(&full, &indices, IndexMode::Spatial).unwrap();
        let denoised = match sub.labels() {
            LabelSet::Classification { labels, .. } => labels.clone(),
            _ => unreachable!(),
        };
        // Redundant path: classify each subsample point independently.
        for (slot, &i) in indices.iter().enumerate() {
            assert_eq!(denoised[slot], full.classify(points.point(i)).unwrap());
        }
    }

    #[test]
    fn denoised_predict_composes_nn_then_classify() {
        let mut rng = seeded(7);
        let (points, labels) = gaussian_mixture(&mut rng, 120);
        let full = KnnModel::new(points.clone(), labels, 9, IndexMode::Spatial).unwrap();
        let mut draw_rng = seeded(8);
        let indices = draw_subsample(120, 25, &mut draw_rng).unwrap();
        let sub = DenoisedModel::build(&full, &indices, IndexMode::Spatial).unwrap();
        let sub_points = points.gather(&indices).unwrap();
        let sub_only = NNIndex::build(sub_points.clone(), IndexMode::Brute).unwrap();
        for _ in 0..50 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            // Compositional oracle: nearest subsample point, then the full
            // model's prediction there.
            let nn = sub_only.query_knn(&x, 1).unwrap().indices[0];
            let want = full.classify(sub_points.point(nn)).unwrap();
            assert_eq!(sub.predict(&x).unwrap(), Prediction::Label(want));
        }
    }

    #[test]
    fn denoised_predict_at_subsample_point_returns_stored_label() {
        let points = PointSet::new(vec![vec![0.0], vec![10.0]]).unwrap();
        let labels = LabelSet::classification(vec![1, 0], 2).unwrap();
        let sub =
            DenoisedModel::with_original_labels(&points, &labels, &[0, 1], IndexMode::Brute).unwrap();
        assert_eq!(sub.predict(&[0.0]).unwrap(), Prediction::Label(1));
        assert_eq!(sub.predict(&[10.0]).unwrap(), Prediction::Label(0));
        assert_eq!(sub.predict(&[2.0]).unwrap(), Prediction::Label(1));
        assert!(sub.predict(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn majority_vote_and_ties() {
        let votes = [Prediction::Label(1), Prediction::Label(1), Prediction::Label(2)];
        assert_eq!(aggregate(&votes, Aggregation::Majority, Some(3)).unwrap(), Prediction::Label(1));
        let tie = [Prediction::Label(0), Prediction::Label(1)];
        assert_eq!(aggregate(&tie, Aggregation::Majority, Some(2)).unwrap(), Prediction::Label(0));
    }

    #[test]
    fn ensemble_of_one_matches_its_submodel() {
        let mut rng = seeded(9);
        let (points, labels) = gaussian_mixture(&mut rng, 60);
        let full = KnnModel::new(points, labels, 7, IndexMode::Spatial).unwrap();
        let ensemble = SubNNModel::train(&full, 20, 1, 42, IndexMode::Spatial).unwrap();
        for _ in 0..20 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            assert_eq!(ensemble.predict(&x).unwrap(), ensemble.submodels()[0].predict(&x).unwrap());
        }
    }

    #[test]
    fn submodel_votes_aggregate_as_declared() {
        let submodels = vec![
            single_point_submodel(1),
            single_point_submodel(1),
            single_point_submodel(2),
        ];
        let ensemble = SubNNModel::from_submodels(submodels, 1, 0).unwrap();
        assert_eq!(ensemble.predict(&[0.0]).unwrap(), Prediction::Label(1));

        let tied = SubNNModel::from_submodels(
            vec![single_point_submodel(0), single_point_submodel(1)],
            1,
            0,
        )
        .unwrap();
        assert_eq!(tied.predict(&[0.0]).unwrap(), Prediction::Label(0));
    }

    #[test]
    fn majority_dominance() {
        // 4 of 5 submodels agree; the majority label must win.
        let submodels = vec![
            single_point_submodel(2),
            single_point_submodel(2),
            single_point_submodel(2),
            single_point_submodel(2),
            single_point_submodel(0),
        ];
        let ensemble = SubNNModel::from_submodels(submodels, 1, 0).unwrap();
        assert_eq!(ensemble.predict(&[0.5]).unwrap(), Prediction::Label(2));
    }

    #[test]
    fn batch_matches_sequential_predictions() {
        let mut rng = seeded(10);
        let (points, labels) = gaussian_mixture(&mut rng, 80);
        let full = KnnModel::new(points, labels, 5, IndexMode::Spatial).unwrap();
        let ensemble = SubNNModel::train(&full, 30, 3, 7, IndexMode::Spatial).unwrap();
        let queries = PointSet::new(
            (0..40)
                .map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
                .collect(),
        )
        .unwrap();
        let (batch, timing) = ensemble.predict_batch(&queries, true, None).unwrap();
        assert!(timing.is_some());
        for (q, want) in queries.iter().zip(&batch) {
            assert_eq!(ensemble.predict(q).unwrap(), *want);
        }
        let timing = timing.unwrap();
        assert_eq!(timing.per_submodel.len(), 3);
        assert!(timing.max_rule() >= timing.avg_rule());
    }

    #[test]
    fn batch_predictions_deterministic_across_runs_and_worker_counts() {
        let mut rng = seeded(11);
        let (points, labels) = gaussian_mixture(&mut rng, 80);
        let full = KnnModel::new(points, labels, 5, IndexMode::Spatial).unwrap();
        let ensemble = SubNNModel::train(&full, 25, 4, 99, IndexMode::Spatial).unwrap();
        let queries = PointSet::new(
            (0..30)
                .map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
                .collect(),
        )
        .unwrap();
        let (a, _) = ensemble.predict_batch(&queries, true, None).unwrap();
        let (b, _) = ensemble.predict_batch(&queries, false, Some(1)).unwrap();
        let (c, _) = ensemble.predict_batch(&queries, true, Some(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn equal_master_seeds_make_identical_ensembles() {
        let mut rng = seeded(12);
        let (points, labels) = gaussian_mixture(&mut rng, 70);
        let full = KnnModel::new(points, labels, 3, IndexMode::Spatial).unwrap();
        let a = SubNNModel::train(&full, 20, 3, 5, IndexMode::Spatial).unwrap();
        let b = SubNNModel::train(&full, 20, 3, 5, IndexMode::Spatial).unwrap();
        for (sa, sb) in a.submodels().iter().zip(b.submodels()) {
            assert_eq!(sa.source_indices(), sb.source_indices());
        }
        for _ in 0..20 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
        }
    }

    #[test]
    fn bagged_single_full_submodel_is_plain_1nn() {
        let mut rng = seeded(13);
        let (points, labels) = gaussian_mixture(&mut rng, 50);
        let plain = KnnModel::new(points.clone(), labels.clone(), 1, IndexMode::Spatial).unwrap();
        let bagged = BaggedModel::train(&points, &labels, 50, 1, 0, IndexMode::Spatial).unwrap();
        for _ in 0..30 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            assert_eq!(
                bagged.predict(&x).unwrap(),
                Prediction::Label(plain.classify(&x).unwrap())
            );
        }
    }

    #[test]
    fn bagged_is_independent_of_k() {
        let mut rng = seeded(14);
        let (points, labels) = gaussian_mixture(&mut rng, 60);
        // k enters only through denoising; the bagged baseline never sees it.
        let bagged = BaggedModel::train(&points, &labels, 20, 3, 11, IndexMode::Spatial).unwrap();
        let again = BaggedModel::train(&points, &labels, 20, 3, 11, IndexMode::Spatial).unwrap();
        for _ in 0..20 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            assert_eq!(bagged.predict(&x).unwrap(), again.predict(&x).unwrap());
        }
    }

    #[test]
    fn k1_subnn_equals_bagged_with_same_seed() {
        let mut rng = seeded(15);
        let (points, labels) = gaussian_mixture(&mut rng, 90);
        let full = KnnModel::new(points.clone(), labels.clone(), 1, IndexMode::Spatial).unwrap();
        let subnn = SubNNModel::train(&full, 30, 4, 21, IndexMode::Spatial).unwrap();
        let bagged = BaggedModel::train(&points, &labels, 30, 4, 21, IndexMode::Spatial).unwrap();
        for _ in 0..50 {
            let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            assert_eq!(subnn.predict(&x).unwrap(), bagged.predict(&x).unwrap());
        }
    }

    #[test]
    fn degenerate_equivalence_full_subsamples_at_training_points() {
        let mut rng = seeded(16);
        let (points, labels) = gaussian_mixture(&mut rng, 50);
        let full = KnnModel::new(points.clone(), labels, 7, IndexMode::Spatial).unwrap();
        for num_models in [1, 3] {
            let ensemble = SubNNModel::train(&full, 50, num_models, 33, IndexMode::Spatial).unwrap();
            for j in 0..points.len() {
                let x = points.point(j);
                assert_eq!(
                    ensemble.predict(x).unwrap(),
                    Prediction::Label(full.classify(x).unwrap())
                );
            }
        }
    }

    #[test]
    fn regression_aggregation_is_linear_in_targets() {
        let mut rng = seeded(17);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
        let targets: Vec<f64> = (0..40).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let points = PointSet::new(rows.clone()).unwrap();
        let scale = 3.5;
        let scaled: Vec<f64> = targets.iter().map(|t| t * scale).collect();
        let base = KnnModel::new(
            points.clone(),
            LabelSet::regression(targets).unwrap(),
            4,
            IndexMode::Spatial,
        )
        .unwrap();
        let scaled_model = KnnModel::new(
            points,
            LabelSet::regression(scaled).unwrap(),
            4,
            IndexMode::Spatial,
        )
        .unwrap();
        let a = SubNNModel::train(&base, 15, 3, 2, IndexMode::Spatial).unwrap();
        let b = SubNNModel::train(&scaled_model, 15, 3, 2, IndexMode::Spatial).unwrap();
        for _ in 0..20 {
            let x = [rng.gen_range(0.0..1.0)];
            let va = a.predict(&x).unwrap().as_value().unwrap();
            let vb = b.predict(&x).unwrap().as_value().unwrap();
            assert!((vb - scale * va).abs() < 1e-9);
        }
    }
}
