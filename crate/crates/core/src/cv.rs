//! Two-stage cross-validated selection of the denoising parameter k.
//!
//! Stage 1 scans a log-scale grid `{2^i}`; stage 2 refines linearly around
//! the stage-1 winner. Folds come from a seeded shuffle, and validation
//! predictions use the same distance and tie rules as deployment, so the
//! whole procedure is deterministic given the seed.
//!
//! Per validation point the neighbors are sorted once up to the largest
//! grid value and every k is evaluated from prefixes of that order; by the
//! deterministic `(distance, index)` ordering this is identical to querying
//! each k from scratch.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::{LabelSet, TaskMode};
use crate::nn::{squared_distance, PointSet};

/// Cross-validation settings.
#[derive(Debug, Clone, Copy)]
pub struct CvConfig {
    /// Number of folds, at least 2.
    pub folds: usize,
    pub seed: u64,
    /// Loss: 0-1 error for classification, MSE for regression. Must match
    /// the label set.
    pub mode: TaskMode,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 2, seed: 0, mode: TaskMode::Classification }
    }
}

/// Outcome of [`cross_validate_k`].
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Minimizer of the stage-2 validation loss (ties to the smaller k).
    pub chosen_k: usize,
    /// Stage-1 winner that seeded the refined grid.
    pub stage1_k: usize,
    /// `(k, mean validation loss)` over the stage-1 grid.
    pub stage1: Vec<(usize, f64)>,
    /// `(k, mean validation loss)` over the stage-2 grid.
    pub stage2: Vec<(usize, f64)>,
    /// Set when the labels hold a single class; `chosen_k` is then 1 and
    /// the grids are empty.
    pub degenerate: bool,
}

/// Log-scale stage-1 grid: `{2^1, ..., 2^ceil(log2 n)}`, with values above
/// `n` clamped to `n` and duplicates removed.
pub fn stage1_grid(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidArgument("stage-1 grid needs n >= 2".into()));
    }
    let max_exp = (n - 1).ilog2() + 1;
    let mut grid = Vec::with_capacity(max_exp as usize);
    for i in 1..=max_exp {
        let value = (1usize << i).min(n);
        if grid.last() != Some(&value) {
            grid.push(value);
        }
    }
    Ok(grid)
}

/// Linear stage-2 grid around the stage-1 winner:
/// `max(1, ceil(k'/2) - 10) ..= min(n, 2k' + 10)`.
pub fn stage2_grid(k_prime: usize, n: usize) -> Result<Vec<usize>> {
    if k_prime == 0 || k_prime > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k' <= n, got k'={k_prime}, n={n}")));
    }
    let lo = k_prime.div_ceil(2).saturating_sub(10).max(1);
    let hi = (2 * k_prime + 10).min(n);
    Ok((lo..=hi).collect())
}

/// Selects k by two-stage cross-validation over `(points, labels)`.
pub fn cross_validate_k(points: &PointSet, labels: &LabelSet, config: &CvConfig) -> Result<CvResult> {
    let n = points.len();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!("{} labels for {n} points", labels.len())));
    }
    if config.mode != labels.mode() {
        return Err(Error::ModeMismatch("CvConfig mode disagrees with label set".into()));
    }
    if config.folds < 2 {
        return Err(Error::InvalidArgument("need at least 2 folds".into()));
    }
    if n < 2 * config.folds {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 * folds, got n={n}, folds={}",
            config.folds
        )));
    }

    if let LabelSet::Classification { labels: ys, .. } = labels {
        if ys.iter().all(|&y| y == ys[0]) {
            return Ok(CvResult {
                chosen_k: 1,
                stage1_k: 1,
                stage1: Vec::new(),
                stage2: Vec::new(),
                degenerate: true,
            });
        }
    }

    // Seeded shuffle, then contiguous near-equal chunks.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);
    let folds = split_folds(&order, config.folds);

    let min_train = folds.iter().map(|f| n - f.len()).min().expect("folds nonempty");

    let grid1 = stage1_grid(n)?;
    let losses1 = grid_losses(points, labels, &folds, &grid1);
    let stage1: Vec<(usize, f64)> = grid1.iter().copied().zip(losses1).collect();
    let stage1_k = argmin_k(&stage1);

    // Stage-1 values above the fold-train size were evaluated clamped, so
    // the refined range is centered on the clamped winner.
    let grid2 = stage2_grid(stage1_k.min(min_train), min_train)?;
    let losses2 = grid_losses(points, labels, &folds, &grid2);
    let stage2: Vec<(usize, f64)> = grid2.iter().copied().zip(losses2).collect();
    let chosen_k = argmin_k(&stage2);

    Ok(CvResult { chosen_k, stage1_k, stage1, stage2, degenerate: false })
}

/// Smallest k attaining the minimum loss.
fn argmin_k(entries: &[(usize, f64)]) -> usize {
    let mut best = entries[0];
    for &(k, loss) in &entries[1..] {
        if loss < best.1 {
            best = (k, loss);
        }
    }
    best.0
}

fn split_folds(order: &[usize], folds: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    (0..folds)
        .map(|f| {
            let lo = f * n / folds;
            let hi = (f + 1) * n / folds;
            let mut chunk = order[lo..hi].to_vec();
            chunk.sort_unstable();
            chunk
        })
        .collect()
}

/// Mean validation loss per grid value, summed over all folds.
fn grid_losses(
    points: &PointSet,
    labels: &LabelSet,
    folds: &[Vec<usize>],
    grid: &[usize],
) -> Vec<f64> {
    let n = points.len();
    let mut totals = vec![0.0; grid.len()];
    for fold in folds {
        let mut in_val = vec![false; n];
        for &i in fold {
            in_val[i] = true;
        }
        // Ascending train indices: local index order matches a model
        // trained on the gathered subset.
        let train: Vec<usize> = (0..n).filter(|&i| !in_val[i]).collect();
        for (slot, loss) in fold_losses(points, labels, &train, fold, grid).into_iter().enumerate() {
            totals[slot] += loss;
        }
    }
    totals.iter().map(|t| t / n as f64).collect()
}

/// Summed validation loss per grid value for one fold.
fn fold_losses(
    points: &PointSet,
    labels: &LabelSet,
    train: &[usize],
    val: &[usize],
    grid: &[usize],
) -> Vec<f64> {
    let max_k = grid.iter().copied().max().unwrap_or(1).min(train.len());
    let per_point: Vec<Vec<f64>> = val
        .par_iter()
        .map(|&v| point_losses(points, labels, train, v, grid, max_k))
        .collect();
    let mut sums = vec![0.0; grid.len()];
    for row in per_point {
        for (slot, loss) in row.into_iter().enumerate() {
            sums[slot] += loss;
        }
    }
    sums
}

/// Loss of the k-NN prediction at one validation point for every grid k;
/// ks above the train size are clamped.
fn point_losses(
    points: &PointSet,
    labels: &LabelSet,
    train: &[usize],
    val_index: usize,
    grid: &[usize],
    max_k: usize,
) -> Vec<f64> {
    let x = points.point(val_index);
    let mut pairs: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(local, &global)| (squared_distance(x, points.point(global)), local))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1))
    };
    if max_k < pairs.len() {
        pairs.select_nth_unstable_by(max_k - 1, cmp);
        pairs.truncate(max_k);
    }
    pairs.sort_unstable_by(cmp);

    match labels {
        LabelSet::Classification { labels: ys, num_classes } => {
            let truth = ys[val_index];
            let mut counts = vec![0usize; *num_classes];
            let mut taken = 0;
            let mut out = Vec::with_capacity(grid.len());
            for &k in grid {
                let k_eff = k.min(pairs.len());
                while taken < k_eff {
                    counts[ys[train[pairs[taken].1]]] += 1;
                    taken += 1;
                }
                // Counts argmax with ties to the smallest label, exactly as
                // in deployment.
                let mut pred = 0;
                for (label, &c) in counts.iter().enumerate().skip(1) {
                    if c > counts[pred] {
                        pred = label;
                    }
                }
                out.push(if pred == truth { 0.0 } else { 1.0 });
            }
            out
        }
        LabelSet::Regression { targets } => {
            let truth = targets[val_index];
            let mut sum = 0.0;
            let mut taken = 0;
            let mut out = Vec::with_capacity(grid.len());
            for &k in grid {
                let k_eff = k.min(pairs.len());
                while taken < k_eff {
                    sum += targets[train[pairs[taken].1]];
                    taken += 1;
                }
                let pred = sum / k_eff as f64;
                out.push((pred - truth) * (pred - truth));
            }
            out
        }
    }
}
