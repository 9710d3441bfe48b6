//! Benchmark harness: relative-error / relative-time tables, sweeps over
//! subsampling ratio and ensemble size, rate-scaling experiments, and the
//! empirical check of the nearest-neighbor distance bound.

pub mod report;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cv::{cross_validate_k, CvConfig};
use crate::data::synth::{synth_manifold, uniform_cube_cd, MarginProfile, SynthSpec};
use crate::data::{GroundTruth, LabeledDataset};
use crate::ensemble::{BaggedModel, BatchTiming, Prediction, SubNNModel};
use crate::error::{Error, Result};
use crate::knn::{rk_theoretical_bound, KnnModel, LabelSet, TaskMode, TheoryParams};
use crate::nn::{IndexMode, NNIndex, PointSet};

/// A trained model the harness can evaluate.
pub enum Method<'a> {
    Knn(&'a KnnModel),
    SubNN(&'a SubNNModel),
    Bagged(&'a BaggedModel),
}

/// Error and timing of one evaluation pass over a test set.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    /// 0-1 error rate (classification) or MSE (regression).
    pub error: f64,
    pub timing: BatchTiming,
}

/// One line of the benchmark table, with absolute and kNN-relative values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    /// Mean error over repetitions.
    pub error: f64,
    /// Sample standard deviation of the error over repetitions.
    pub error_std: f64,
    pub relative_error: f64,
    /// Median over repetitions of max-over-submodels time plus aggregation,
    /// in seconds.
    pub time_max_rule: f64,
    /// Median over repetitions of mean-over-submodels time plus aggregation.
    pub time_avg_rule: f64,
    pub relative_time_max: f64,
    pub relative_time_avg: f64,
    pub chosen_k: Option<usize>,
    pub seed: u64,
    pub repetitions: usize,
    /// Set when the kNN reference error or time was zero; the relative
    /// columns then carry the absolute values unchanged.
    pub relative_flagged: bool,
}

/// 0-1 error rate or mean squared error of predictions against labels.
pub fn prediction_error(predictions: &[Prediction], labels: &LabelSet) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Empty("prediction batch".into()));
    }
    match labels {
        LabelSet::Classification { labels, .. } => {
            let mut wrong = 0usize;
            for (p, &y) in predictions.iter().zip(labels) {
                let label = p
                    .as_label()
                    .ok_or_else(|| Error::ModeMismatch("value prediction vs class labels".into()))?;
                if label != y {
                    wrong += 1;
                }
            }
            Ok(wrong as f64 / labels.len() as f64)
        }
        LabelSet::Regression { targets } => {
            let mut sum = 0.0;
            for (p, &t) in predictions.iter().zip(targets) {
                let v = p
                    .as_value()
                    .ok_or_else(|| Error::ModeMismatch("label prediction vs targets".into()))?;
                sum += (v - t) * (v - t);
            }
            Ok(sum / targets.len() as f64)
        }
    }
}

/// Runs a timed batch prediction of `method` over the test points (one
/// untimed warm-up pass first) and scores it against the test labels.
pub fn evaluate_method(
    method: &Method,
    test: &LabeledDataset,
    workers: Option<usize>,
) -> Result<EvalOutcome> {
    if test.is_empty() {
        return Err(Error::Empty("test set".into()));
    }
    let (predictions, timing) = match method {
        Method::Knn(model) => {
            if model.mode() != test.mode() {
                return Err(Error::ModeMismatch("model and test set disagree".into()));
            }
            knn_batch(model, &test.points, true)?
        }
        Method::SubNN(model) => {
            if model.mode() != test.mode() {
                return Err(Error::ModeMismatch("model and test set disagree".into()));
            }
            let (p, t) = model.predict_batch(&test.points, true, workers)?;
            (p, t.expect("timing requested"))
        }
        Method::Bagged(model) => {
            if model.mode() != test.mode() {
                return Err(Error::ModeMismatch("model and test set disagree".into()));
            }
            let (p, t) = model.predict_batch(&test.points, true, workers)?;
            (p, t.expect("timing requested"))
        }
    };
    let error = prediction_error(&predictions, &test.labels)?;
    Ok(EvalOutcome { error, timing })
}

/// Sequential whole-batch prediction for the single-machine kNN baseline.
fn knn_batch(
    model: &KnnModel,
    queries: &PointSet,
    timing: bool,
) -> Result<(Vec<Prediction>, BatchTiming)> {
    let run = |model: &KnnModel| -> Result<(Vec<Prediction>, Duration)> {
        let start = Instant::now();
        let mut preds = Vec::with_capacity(queries.len());
        for q in queries.iter() {
            preds.push(match model.mode() {
                TaskMode::Classification => Prediction::Label(model.classify(q)?),
                TaskMode::Regression => Prediction::Value(model.regress_value(q)?),
            });
        }
        Ok((preds, start.elapsed()))
    };
    if timing {
        run(model)?; // warm-up, excluded from the record
    }
    let (preds, elapsed) = run(model)?;
    Ok((preds, BatchTiming { per_submodel: vec![elapsed], aggregation: Duration::ZERO }))
}

/// Absolute per-repetition measurements for one method.
#[derive(Debug, Clone)]
pub struct MethodRuns {
    pub method: String,
    pub errors: Vec<f64>,
    pub times_max: Vec<f64>,
    pub times_avg: Vec<f64>,
    pub chosen_k: Option<usize>,
    pub seed: u64,
}

impl MethodRuns {
    pub fn mean_error(&self) -> f64 {
        mean(&self.errors)
    }

    pub fn error_std(&self) -> f64 {
        sample_std(&self.errors)
    }

    pub fn median_time_max(&self) -> f64 {
        median(&self.times_max)
    }

    pub fn median_time_avg(&self) -> f64 {
        median(&self.times_avg)
    }
}

/// Divides every row's absolute values by the kNN row's, producing the
/// table rows. The kNN row must be present; a zero kNN error or time trips
/// the division guard and leaves absolute values with a flag.
pub fn relative_table(runs: &[MethodRuns]) -> Result<Vec<BenchRow>> {
    let knn = runs
        .iter()
        .find(|r| r.method == "kNN")
        .ok_or_else(|| Error::InvalidArgument("relative table needs a kNN row".into()))?;
    let ref_error = knn.mean_error();
    let ref_time_max = knn.median_time_max();
    let ref_time_avg = knn.median_time_avg();
    let error_ok = ref_error > 0.0;
    let time_ok = ref_time_max > 0.0 && ref_time_avg > 0.0;
    Ok(runs
        .iter()
        .map(|r| {
            let error = r.mean_error();
            let time_max = r.median_time_max();
            let time_avg = r.median_time_avg();
            BenchRow {
                method: r.method.clone(),
                error,
                error_std: r.error_std(),
                relative_error: if error_ok { error / ref_error } else { error },
                time_max_rule: time_max,
                time_avg_rule: time_avg,
                relative_time_max: if time_ok { time_max / ref_time_max } else { time_max },
                relative_time_avg: if time_ok { time_avg / ref_time_avg } else { time_avg },
                chosen_k: r.chosen_k,
                seed: r.seed,
                repetitions: r.errors.len(),
                relative_flagged: !(error_ok && time_ok),
            }
        })
        .collect())
}

/// Sweep settings: which ensembles to run against the baselines.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub ratios: Vec<f64>,
    pub ensemble_sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub include_bagged: bool,
    pub workers: Option<usize>,
    /// Denoising parameter; `None` selects it by two-stage CV.
    pub fixed_k: Option<usize>,
}

/// One point of an error/time-vs-I curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ensemble_size: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub median_time_max: f64,
    pub median_time_avg: f64,
}

/// Error and time of one method family at one subsampling ratio, as a
/// function of the ensemble size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub method: String,
    pub ratio: f64,
    pub points: Vec<CurvePoint>,
}

/// Outcome of [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<BenchRow>,
    pub curves: Vec<Curve>,
    pub chosen_k: usize,
}

/// Trains and evaluates kNN, 1NN and subNN / bagged ensembles for every
/// `(ratio, ensemble size)` pair; k comes from one two-stage CV on the
/// training set and is shared by all ensembles.
pub fn sweep(train: &LabeledDataset, test: &LabeledDataset, spec: &SweepSpec) -> Result<SweepOutcome> {
    if spec.repetitions == 0 {
        return Err(Error::InvalidArgument("need at least 1 repetition".into()));
    }
    let n = train.len();
    for &ratio in &spec.ratios {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::InvalidArgument(format!("ratio {ratio} outside (0, 1]")));
        }
        if subsample_size(n, ratio) == 0 {
            return Err(Error::InvalidArgument(format!("ratio {ratio} empties the subsample")));
        }
    }

    let k = match spec.fixed_k {
        Some(k) => k,
        None => {
            cross_validate_k(
                &train.points,
                &train.labels,
                &CvConfig { folds: 2, seed: spec.seed, mode: train.mode() },
            )?
            .chosen_k
        }
    };

    let knn = KnnModel::new(train.points.clone(), train.labels.clone(), k, IndexMode::Spatial)?;
    let one_nn = KnnModel::new(train.points.clone(), train.labels.clone(), 1, IndexMode::Spatial)?;

    let mut runs = Vec::new();
    runs.push(run_reps("kNN", spec.repetitions, Some(k), spec.seed, |_| {
        evaluate_method(&Method::Knn(&knn), test, spec.workers)
    })?);
    runs.push(run_reps("1NN", spec.repetitions, None, spec.seed, |_| {
        evaluate_method(&Method::Knn(&one_nn), test, spec.workers)
    })?);

    let mut curves = Vec::new();
    for &ratio in &spec.ratios {
        let m = subsample_size(n, ratio);
        let mut sub_curve = Curve { method: "subNN".into(), ratio, points: Vec::new() };
        let mut bag_curve = Curve { method: "bagged".into(), ratio, points: Vec::new() };
        for &size in &spec.ensemble_sizes {
            let sub_runs = run_reps(
                &format!("subNN({ratio},{size})"),
                spec.repetitions,
                Some(k),
                spec.seed,
                |rep| {
                    let model =
                        SubNNModel::train(&knn, m, size, rep_seed(spec.seed, rep), IndexMode::Spatial)?;
                    evaluate_method(&Method::SubNN(&model), test, spec.workers)
                },
            )?;
            sub_curve.points.push(curve_point(size, &sub_runs));
            runs.push(sub_runs);
            if spec.include_bagged {
                let bag_runs = run_reps(
                    &format!("bagged({ratio},{size})"),
                    spec.repetitions,
                    None,
                    spec.seed,
                    |rep| {
                        let model = BaggedModel::train(
                            &train.points,
                            &train.labels,
                            m,
                            size,
                            rep_seed(spec.seed, rep),
                            IndexMode::Spatial,
                        )?;
                        evaluate_method(&Method::Bagged(&model), test, spec.workers)
                    },
                )?;
                bag_curve.points.push(curve_point(size, &bag_runs));
                runs.push(bag_runs);
            }
        }
        curves.push(sub_curve);
        if spec.include_bagged {
            curves.push(bag_curve);
        }
    }

    Ok(SweepOutcome { rows: relative_table(&runs)?, curves, chosen_k: k })
}

pub fn subsample_size(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).round() as usize).min(n)
}

fn curve_point(size: usize, runs: &MethodRuns) -> CurvePoint {
    CurvePoint {
        ensemble_size: size,
        mean_error: runs.mean_error(),
        std_error: runs.error_std(),
        median_time_max: runs.median_time_max(),
        median_time_avg: runs.median_time_avg(),
    }
}

/// Ensemble seed of one repetition, a pure function of the master seed and
/// the repetition index. subNN and bagged runs share it, so paired
/// comparisons use common subsample draws.
pub fn rep_seed(master: u64, rep: usize) -> u64 {
    master.wrapping_add((rep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn run_reps<F>(
    method: &str,
    repetitions: usize,
    chosen_k: Option<usize>,
    seed: u64,
    mut eval: F,
) -> Result<MethodRuns>
where
    F: FnMut(usize) -> Result<EvalOutcome>,
{
    let mut errors = Vec::with_capacity(repetitions);
    let mut times_max = Vec::with_capacity(repetitions);
    let mut times_avg = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let outcome = eval(rep)?;
        errors.push(outcome.error);
        times_max.push(outcome.timing.max_rule().as_secs_f64());
        times_avg.push(outcome.timing.avg_rule().as_secs_f64());
    }
    Ok(MethodRuns { method: method.into(), errors, times_max, times_avg, chosen_k, seed })
}

// ---------------------------------------------------------------------------
// Rate-scaling experiment
// ---------------------------------------------------------------------------

/// How the subsampling ratio scales with n.
#[derive(Debug, Clone, Copy)]
pub enum RhoRule {
    Fixed(f64),
    /// `rho(n) = min(1, coeff * n^(-2 alpha / (2 alpha + d)) * ln n)`: the
    /// vanishing-ratio regime in which subNN keeps the kNN rate.
    VanishingWithLog { coeff: f64 },
}

impl RhoRule {
    pub fn ratio(&self, n: usize, alpha: f64, d: usize) -> f64 {
        match self {
            RhoRule::Fixed(rho) => *rho,
            RhoRule::VanishingWithLog { coeff } => {
                let n_f = n as f64;
                let exponent = -2.0 * alpha / (2.0 * alpha + d as f64);
                (coeff * n_f.powf(exponent) * n_f.ln()).min(1.0)
            }
        }
    }
}

/// Settings for [`rate_experiment`].
#[derive(Debug, Clone)]
pub struct RateSpec {
    pub n_grid: Vec<usize>,
    pub d: usize,
    pub ambient_dim: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub margin: MarginProfile,
    pub noise_flip: f64,
    pub rho_rule: RhoRule,
    pub ensemble_size: usize,
    pub seeds: Vec<u64>,
    pub test_size: usize,
    pub workers: Option<usize>,
}

/// Mean excess errors at one sample size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub ratio: f64,
    pub knn_excess: f64,
    pub subnn_excess: f64,
    /// Set when an excess was nonpositive; the point is excluded from the
    /// slope fits.
    pub excluded: bool,
}

/// Outcome of [`rate_experiment`].
///
/// `knn_slope` / `subnn_slope` fit `log(mean excess)` against `log n`;
/// the `paired_*` variants fit one slope per seed (each seed's data is
/// generated with the same field phase at every n, so its points are
/// paired) and average the slopes, which is much less sensitive to the
/// seed-to-seed variance of cross-validated k choices. All fits are absent
/// when fewer than 2 usable grid points remain.
#[derive(Debug, Clone)]
pub struct RateOutcome {
    pub points: Vec<RatePoint>,
    pub knn_slope: Option<f64>,
    pub subnn_slope: Option<f64>,
    pub paired_knn_slope: Option<f64>,
    pub paired_subnn_slope: Option<f64>,
}

/// CV-tuned kNN and subNN excess errors over a grid of sample sizes, with
/// least-squares slopes of `log(excess)` against `log(n)`.
pub fn rate_experiment(spec: &RateSpec) -> Result<RateOutcome> {
    if spec.n_grid.len() < 3 {
        return Err(Error::InvalidArgument("rate experiment needs >= 3 grid points".into()));
    }
    if spec.seeds.is_empty() {
        return Err(Error::InvalidArgument("rate experiment needs >= 1 seed".into()));
    }
    // excess[seed][grid position]
    let mut knn_excess = vec![vec![0.0; spec.n_grid.len()]; spec.seeds.len()];
    let mut sub_excess = vec![vec![0.0; spec.n_grid.len()]; spec.seeds.len()];
    let mut ratios = Vec::with_capacity(spec.n_grid.len());
    for (slot, &n) in spec.n_grid.iter().enumerate() {
        let ratio = spec.rho_rule.ratio(n, spec.alpha, spec.d);
        let m = subsample_size(n, ratio);
        if m == 0 {
            return Err(Error::InvalidArgument(format!("rho rule empties the subsample at n={n}")));
        }
        ratios.push(ratio);
        for (row, &seed) in spec.seeds.iter().enumerate() {
            let data = synth_manifold(&SynthSpec {
                d: spec.d,
                ambient_dim: spec.ambient_dim,
                n: n + spec.test_size,
                alpha: spec.alpha,
                lambda: spec.lambda,
                margin: spec.margin,
                num_classes: 2,
                noise_flip: spec.noise_flip,
                noise_sigma: 0.0,
                mode: TaskMode::Classification,
                seed,
            })?;
            let train_idx: Vec<usize> = (0..n).collect();
            let test_idx: Vec<usize> = (n..n + spec.test_size).collect();
            let train = data.gather(&train_idx)?;
            let test = data.gather(&test_idx)?;

            let cv = cross_validate_k(
                &train.points,
                &train.labels,
                &CvConfig { folds: 2, seed, mode: TaskMode::Classification },
            )?;
            let knn =
                KnnModel::new(train.points.clone(), train.labels.clone(), cv.chosen_k, IndexMode::Spatial)?;
            let (knn_preds, _) = knn_batch(&knn, &test.points, false)?;
            knn_excess[row][slot] = conditional_excess(&knn_preds, &test)?;

            let sub = SubNNModel::train(&knn, m, spec.ensemble_size, seed, IndexMode::Spatial)?;
            let (sub_preds, _) = sub.predict_batch(&test.points, false, spec.workers)?;
            sub_excess[row][slot] = conditional_excess(&sub_preds, &test)?;
        }
    }

    let seeds = spec.seeds.len() as f64;
    let points: Vec<RatePoint> = spec
        .n_grid
        .iter()
        .enumerate()
        .map(|(slot, &n)| {
            let knn_mean = knn_excess.iter().map(|row| row[slot]).sum::<f64>() / seeds;
            let sub_mean = sub_excess.iter().map(|row| row[slot]).sum::<f64>() / seeds;
            RatePoint {
                n,
                ratio: ratios[slot],
                knn_excess: knn_mean,
                subnn_excess: sub_mean,
                excluded: knn_mean <= 0.0 || sub_mean <= 0.0,
            }
        })
        .collect();

    let usable: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.excluded)
        .map(|(i, _)| i)
        .collect();
    let mut outcome = RateOutcome {
        points,
        knn_slope: None,
        subnn_slope: None,
        paired_knn_slope: None,
        paired_subnn_slope: None,
    };
    if usable.len() < 2 {
        return Ok(outcome);
    }
    let xs: Vec<f64> = usable.iter().map(|&i| (spec.n_grid[i] as f64).ln()).collect();
    let fit = |values: &dyn Fn(usize) -> f64| {
        let ys: Vec<f64> = usable.iter().map(|&i| values(i)).collect();
        ols_slope(&xs, &ys)
    };
    outcome.knn_slope = Some(fit(&|i| outcome.points[i].knn_excess.ln()));
    outcome.subnn_slope = Some(fit(&|i| outcome.points[i].subnn_excess.ln()));

    // Per-seed slopes need every usable excess positive for that seed.
    let paired = |rows: &[Vec<f64>]| -> Option<f64> {
        let mut slopes = Vec::with_capacity(rows.len());
        for row in rows {
            if usable.iter().any(|&i| row[i] <= 0.0) {
                continue;
            }
            let ys: Vec<f64> = usable.iter().map(|&i| row[i].ln()).collect();
            slopes.push(ols_slope(&xs, &ys));
        }
        (!slopes.is_empty()).then(|| slopes.iter().sum::<f64>() / slopes.len() as f64)
    };
    outcome.paired_knn_slope = paired(&knn_excess);
    outcome.paired_subnn_slope = paired(&sub_excess);
    Ok(outcome)
}

/// Plug-in conditional excess error: the mean over test points of
/// `eta_(1)(x) - eta_h(x)(x)`. Equals `error - bayes_error` with both sides
/// conditioned on the drawn points, which drops the label-sampling noise of
/// the raw 0-1 estimate.
pub fn conditional_excess(predictions: &[Prediction], test: &LabeledDataset) -> Result<f64> {
    let eta = match &test.truth {
        Some(GroundTruth::Classification { eta, .. }) => eta,
        _ => return Err(Error::InvalidArgument("conditional excess needs classification truth".into())),
    };
    if predictions.len() != eta.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} truth rows",
            predictions.len(),
            eta.len()
        )));
    }
    let mut sum = 0.0;
    for (p, probs) in predictions.iter().zip(eta) {
        let label = p
            .as_label()
            .ok_or_else(|| Error::ModeMismatch("value prediction in classification excess".into()))?;
        sum += probs.top() - probs.entries()[label];
    }
    Ok(sum / eta.len() as f64)
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

// ---------------------------------------------------------------------------
// Empirical nearest-neighbor distance bound
// ---------------------------------------------------------------------------

/// How k scales with n in [`rk_experiment`].
#[derive(Debug, Clone, Copy)]
pub enum KRule {
    Fixed(usize),
    /// `k = ceil(coeff * n^exponent)`, clamped to `1..=n`.
    PowerOfN { coeff: f64, exponent: f64 },
}

impl KRule {
    pub fn k(&self, n: usize) -> usize {
        let k = match self {
            KRule::Fixed(k) => *k,
            KRule::PowerOfN { coeff, exponent } => (coeff * (n as f64).powf(*exponent)).ceil() as usize,
        };
        k.clamp(1, n)
    }
}

/// Settings for [`rk_experiment`]: uniform data on `[0,1]^d` where the
/// ball-mass constant is computable.
#[derive(Debug, Clone)]
pub struct RkSpec {
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub k_rule: KRule,
    pub seeds: Vec<u64>,
    pub delta: f64,
    /// Approximate query-grid size; the actual lattice has
    /// `ceil(queries^(1/d))^d` points.
    pub queries: usize,
}

/// Empirical sup of the k-th NN distance versus the theoretical bound at
/// one `(n, k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RkPoint {
    pub n: usize,
    pub k: usize,
    pub bound: f64,
    pub sup_mean: f64,
    pub sup_max: f64,
    pub satisfied_fraction: f64,
    pub trials: usize,
}

/// For each grid n: draw seeded uniform samples, take the max of
/// `kth_nn_distance` over a lattice of queries, and compare against
/// the theoretical bound with `C_d` of the unit cube.
pub fn rk_experiment(spec: &RkSpec) -> Result<Vec<RkPoint>> {
    if spec.seeds.is_empty() {
        return Err(Error::InvalidArgument("rk experiment needs >= 1 seed".into()));
    }
    let params = TheoryParams {
        vc_dim: TheoryParams::vc_dim_for_balls(spec.d),
        delta: spec.delta,
        c_d: uniform_cube_cd(spec.d),
        d: spec.d,
    };
    let queries = lattice_queries(spec.d, spec.queries);
    let mut points = Vec::with_capacity(spec.n_grid.len());
    for &n in &spec.n_grid {
        let k = spec.k_rule.k(n);
        let bound = rk_theoretical_bound(&params, n, k)?;
        let mut sups = Vec::with_capacity(spec.seeds.len());
        for &seed in &spec.seeds {
            let data = synth_manifold(&SynthSpec {
                d: spec.d,
                ambient_dim: spec.d,
                n,
                alpha: 1.0,
                lambda: 1.0,
                margin: MarginProfile::Constant { label: 0 },
                num_classes: 2,
                noise_flip: 0.0,
                noise_sigma: 0.0,
                mode: TaskMode::Classification,
                seed,
            })?;
            let index = NNIndex::build(data.points, IndexMode::Spatial)?;
            let mut sup: f64 = 0.0;
            for q in queries.iter() {
                sup = sup.max(index.kth_nn_distance(q, k)?);
            }
            sups.push(sup);
        }
        let satisfied = sups.iter().filter(|&&s| s <= bound).count();
        points.push(RkPoint {
            n,
            k,
            bound,
            sup_mean: mean(&sups),
            sup_max: sups.iter().fold(0.0f64, |a, &b| a.max(b)),
            satisfied_fraction: satisfied as f64 / sups.len() as f64,
            trials: sups.len(),
        });
    }
    Ok(points)
}

/// Regular lattice on `[0,1]^d` with at least `target` points.
pub fn lattice_queries(d: usize, target: usize) -> PointSet {
    let per_axis = (target as f64).powf(1.0 / d as f64).ceil() as usize;
    let per_axis = per_axis.max(2);
    let step = 1.0 / (per_axis - 1) as f64;
    let total = per_axis.pow(d as u32);
    let mut data = Vec::with_capacity(total * d);
    for mut idx in 0..total {
        for _ in 0..d {
            data.push((idx % per_axis) as f64 * step);
            idx /= per_axis;
        }
    }
    PointSet::from_flat(data, d).expect("lattice is nonempty")
}

// ---------------------------------------------------------------------------
// Paired comparison
// ---------------------------------------------------------------------------

/// One-sided paired t-test outcome.
#[derive(Debug, Clone, Copy)]
pub struct PairedTest {
    pub mean_diff: f64,
    pub t_statistic: f64,
    pub critical_t: f64,
    pub significant: bool,
}

/// Tests whether `mean(b - a) > 0` — that method `a`'s values run lower —
/// at the given one-sided confidence level.
pub fn paired_one_sided_t(a: &[f64], b: &[f64], confidence: f64) -> Result<PairedTest> {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument("paired test needs two equal samples of size >= 2".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument("confidence must lie in (0, 1)".into()));
    }
    let diffs: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let mean_diff = mean(&diffs);
    let sd = sample_std(&diffs);
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::InvalidArgument(format!("t distribution: {e}")))?;
    let critical_t = dist.inverse_cdf(confidence);
    let t_statistic = if sd > 0.0 {
        mean_diff / (sd / n.sqrt())
    } else if mean_diff > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    Ok(PairedTest { mean_diff, t_statistic, critical_t, significant: t_statistic > critical_t })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledDataset;
    use approx::assert_relative_eq;

    fn runs(method: &str, errors: &[f64], tmax: &[f64], tavg: &[f64]) -> MethodRuns {
        MethodRuns {
            method: method.into(),
            errors: errors.to_vec(),
            times_max: tmax.to_vec(),
            times_avg: tavg.to_vec(),
            chosen_k: None,
            seed: 0,
        }
    }

    #[test]
    fn prediction_error_basics() {
        let labels = LabelSet::classification(vec![0, 1, 1], 2).unwrap();
        let perfect = [Prediction::Label(0), Prediction::Label(1), Prediction::Label(1)];
        assert_eq!(prediction_error(&perfect, &labels).unwrap(), 0.0);
        let all_wrong = [Prediction::Label(1), Prediction::Label(0), Prediction::Label(0)];
        assert_eq!(prediction_error(&all_wrong, &labels).unwrap(), 1.0);

        let targets = LabelSet::regression(vec![0.0, 3.0]).unwrap();
        let preds = [Prediction::Value(1.0), Prediction::Value(3.0)];
        assert_eq!(prediction_error(&preds, &targets).unwrap(), 0.5);

        assert!(prediction_error(&perfect, &targets).is_err());
    }

    #[test]
    fn relative_table_matches_reported_ratios() {
        let rows = relative_table(&[
            runs("kNN", &[0.100], &[0.100], &[0.100]),
            runs("1NN", &[0.128], &[0.0609], &[0.0609]),
            runs("subNN(0.1,10)", &[0.1039], &[0.0247], &[0.0216]),
        ])
        .unwrap();
        assert_relative_eq!(rows[0].relative_error, 1.0, max_relative = 1e-12);
        assert_relative_eq!(rows[0].relative_time_max, 1.0, max_relative = 1e-12);
        assert_relative_eq!(rows[1].relative_error, 1.280, max_relative = 1e-12);
        assert_relative_eq!(rows[2].relative_time_max, 0.247, max_relative = 1e-12);
        assert!(!rows[1].relative_flagged);
    }

    #[test]
    fn relative_table_guards_division_by_zero() {
        let rows = relative_table(&[
            runs("kNN", &[0.0], &[0.1], &[0.1]),
            runs("1NN", &[0.2], &[0.05], &[0.05]),
        ])
        .unwrap();
        assert!(rows[1].relative_flagged);
        assert_eq!(rows[1].relative_error, 0.2);

        assert!(relative_table(&[runs("1NN", &[0.1], &[0.1], &[0.1])]).is_err());
    }

    #[test]
    fn ols_slope_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 - 0.5 * x).collect();
        assert_relative_eq!(ols_slope(&xs, &ys), -0.5, max_relative = 1e-12);
    }

    #[test]
    fn paired_test_detects_clear_difference() {
        let a = [0.10, 0.11, 0.09, 0.10, 0.12, 0.10];
        let b = [0.20, 0.21, 0.19, 0.22, 0.20, 0.21];
        let test = paired_one_sided_t(&a, &b, 0.95).unwrap();
        assert!(test.significant);
        assert!(test.mean_diff > 0.0);

        let sym = paired_one_sided_t(&b, &a, 0.95).unwrap();
        assert!(!sym.significant);
    }

    #[test]
    fn paired_test_rejects_degenerate_input() {
        assert!(paired_one_sided_t(&[1.0], &[2.0], 0.95).is_err());
        assert!(paired_one_sided_t(&[1.0, 2.0], &[2.0], 0.95).is_err());
        assert!(paired_one_sided_t(&[1.0, 2.0], &[2.0, 3.0], 1.5).is_err());
    }

    #[test]
    fn lattice_covers_cube_corners() {
        let grid = lattice_queries(2, 1000);
        assert!(grid.len() >= 1000);
        let has = |target: &[f64]| grid.iter().any(|p| p == target);
        assert!(has(&[0.0, 0.0]));
        assert!(has(&[1.0, 1.0]));
        assert!(has(&[0.0, 1.0]));
    }

    #[test]
    fn krule_and_rhorule_clamp() {
        assert_eq!(KRule::PowerOfN { coeff: 1.0, exponent: 2.0 / 3.0 }.k(1000), 100);
        assert_eq!(KRule::Fixed(5000).k(100), 100);
        assert_eq!(KRule::Fixed(0).k(100), 1);
        let rho = RhoRule::VanishingWithLog { coeff: 4.0 }.ratio(1000, 1.0, 1);
        assert!(rho > 0.0 && rho <= 1.0);
        assert_eq!(RhoRule::Fixed(0.25).ratio(123, 1.0, 2), 0.25);
    }

    #[test]
    fn evaluate_method_times_and_scores() {
        let mut rng = {
            use rand::SeedableRng;
            rand_chacha::ChaCha8Rng::seed_from_u64(3)
        };
        use rand::Rng;
        let rows: Vec<Vec<f64>> =
            (0..80).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] > 0.5)).collect();
        let points = PointSet::new(rows).unwrap();
        let label_set = LabelSet::classification(labels, 2).unwrap();
        let train = LabeledDataset::new(points.clone(), label_set.clone()).unwrap();
        let knn = KnnModel::new(points, label_set, 3, IndexMode::Spatial).unwrap();
        let outcome = evaluate_method(&Method::Knn(&knn), &train, None).unwrap();
        assert!(outcome.error <= 0.2);
        assert!(outcome.timing.max_rule() >= outcome.timing.avg_rule());
    }

    #[test]
    fn sweep_degenerate_ratio_one_single_model() {
        // ratio 1.0, I = 1: at training points the ensemble is exactly the
        // full kNN model.
        let mut rng = {
            use rand::SeedableRng;
            rand_chacha::ChaCha8Rng::seed_from_u64(5)
        };
        use rand::Rng;
        let rows: Vec<Vec<f64>> =
            (0..60).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + r[1] > 1.0)).collect();
        let data = LabeledDataset::new(
            PointSet::new(rows).unwrap(),
            LabelSet::classification(labels, 2).unwrap(),
        )
        .unwrap();
        let spec = SweepSpec {
            ratios: vec![1.0],
            ensemble_sizes: vec![1],
            repetitions: 2,
            seed: 9,
            include_bagged: true,
            workers: Some(2),
            fixed_k: None,
        };
        let outcome = sweep(&data, &data, &spec).unwrap();
        let knn_row = outcome.rows.iter().find(|r| r.method == "kNN").unwrap();
        let sub_row = outcome.rows.iter().find(|r| r.method.starts_with("subNN")).unwrap();
        assert_relative_eq!(knn_row.relative_error, 1.0, max_relative = 1e-12);
        assert_eq!(sub_row.error, knn_row.error);
        assert_eq!(outcome.curves.len(), 2);
        assert!(sub_row.error_std >= 0.0);
    }

    #[test]
    fn sweep_rejects_bad_ratios() {
        let data = LabeledDataset::new(
            PointSet::new(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap(),
            LabelSet::classification(vec![0, 0, 1, 1], 2).unwrap(),
        )
        .unwrap();
        let bad = SweepSpec {
            ratios: vec![0.01],
            ensemble_sizes: vec![1],
            repetitions: 1,
            seed: 0,
            include_bagged: false,
            workers: None,
            fixed_k: None,
        };
        assert!(sweep(&data, &data, &bad).is_err());
    }
}
