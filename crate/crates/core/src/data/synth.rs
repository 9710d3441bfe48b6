//! Synthetic data with known ground truth.
//!
//! Points are drawn uniformly on the intrinsic cube `[0,1]^d` and embedded
//! isometrically into `R^D` (zero padding followed by a seeded random
//! rotation). The conditional class probabilities vary along a fixed
//! direction of the cube, with a tunable amplitude and a margin exponent
//! that controls how much mass sits near the decision boundary; the
//! construction is Hölder with the requested `(lambda, alpha)` by choice of
//! its frequency. Regression targets are a smooth signal plus Gaussian
//! noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{GroundTruth, LabeledDataset};
use crate::error::{Error, Result};
use crate::knn::{LabelSet, ProbVector, TaskMode};
use crate::nn::PointSet;

/// Shape of the conditional class probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginProfile {
    /// `eta` puts all mass on one class everywhere; no decision boundary.
    Constant { label: usize },
    /// Class regions along a direction of the cube. `amplitude` in `[0,1]`
    /// scales how far `eta` moves away from uniform; `exponent >= 1`
    /// flattens the top-two gap near boundaries, so larger exponents put
    /// more mass at small margins.
    Power { amplitude: f64, exponent: f64 },
    /// Binary class bands whose widths shrink geometrically along the
    /// projected coordinate: `w(t) = width_max * exp(-decay_rate * t)`.
    /// Every sample size then leaves some bands unresolved, so the excess
    /// error of a tuned neighbor method decays smoothly over a wide range
    /// of n instead of collapsing once a single band scale is resolved.
    MultiScale { amplitude: f64, exponent: f64, width_max: f64, decay_rate: f64 },
}

/// Specification of one synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    /// Intrinsic dimension of the support.
    pub d: usize,
    /// Ambient dimension; must be at least `d`.
    pub ambient_dim: usize,
    pub n: usize,
    /// Hölder exponent of the regression function, in `(0, 1]`.
    pub alpha: f64,
    /// Hölder constant of the regression function.
    pub lambda: f64,
    pub margin: MarginProfile,
    pub num_classes: usize,
    /// Probability of flipping a label to a uniformly chosen other class;
    /// folded into `eta`, so the recorded truth reflects it.
    pub noise_flip: f64,
    /// Standard deviation of additive target noise (regression only).
    pub noise_sigma: f64,
    pub mode: TaskMode,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > self.ambient_dim {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= d <= D, got d={}, D={}",
                self.d, self.ambient_dim
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument("alpha must lie in (0, 1]".into()));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.noise_flip) {
            return Err(Error::InvalidArgument("noise_flip must lie in [0, 0.5)".into()));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::InvalidArgument("noise_sigma must be nonnegative".into()));
        }
        if self.mode == TaskMode::Classification {
            if self.num_classes < 2 {
                return Err(Error::InvalidArgument("need at least 2 classes".into()));
            }
            match self.margin {
                MarginProfile::Constant { label } => {
                    if label >= self.num_classes {
                        return Err(Error::InvalidArgument("constant label out of range".into()));
                    }
                }
                MarginProfile::Power { amplitude, exponent } => {
                    if !(0.0..=1.0).contains(&amplitude) {
                        return Err(Error::InvalidArgument("amplitude must lie in [0, 1]".into()));
                    }
                    if exponent < 1.0 {
                        return Err(Error::InvalidArgument("margin exponent must be >= 1".into()));
                    }
                }
                MarginProfile::MultiScale { amplitude, exponent, width_max, decay_rate } => {
                    if self.num_classes != 2 {
                        return Err(Error::InvalidArgument(
                            "multi-scale margins are binary only".into(),
                        ));
                    }
                    if !(0.0..=1.0).contains(&amplitude) {
                        return Err(Error::InvalidArgument("amplitude must lie in [0, 1]".into()));
                    }
                    if exponent < 1.0 {
                        return Err(Error::InvalidArgument("margin exponent must be >= 1".into()));
                    }
                    if !(width_max > 0.0 && width_max < 1.0) {
                        return Err(Error::InvalidArgument("width_max must lie in (0, 1)".into()));
                    }
                    if decay_rate < 0.0 {
                        return Err(Error::InvalidArgument("decay_rate must be nonnegative".into()));
                    }
                    // The finest band fixes the Lipschitz constant; the
                    // requested lambda must cover it.
                    let edges = band_edges(width_max, decay_rate);
                    let w_min = min_band_width(&edges);
                    let diam = (self.d as f64).sqrt();
                    let required =
                        amplitude * exponent * 2.0 / w_min / diam * diam.powf(1.0 - self.alpha);
                    if self.lambda < required {
                        return Err(Error::InvalidArgument(format!(
                            "multi-scale bands need lambda >= {required:.1}, got {}",
                            self.lambda
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Ball-mass lower-bound constant for the uniform distribution on
/// `[0,1]^d`: a radius-`r` ball centered in the cube keeps at least its
/// corner orthant inside, so `P(B(x,r)) >= (v_d / 2^d) r^d` for `r <= 1`.
pub fn uniform_cube_cd(d: usize) -> f64 {
    unit_ball_volume(d) / 2f64.powi(d as i32)
}

/// Generates a dataset per `spec`.
pub fn synth_manifold(spec: &SynthSpec) -> Result<LabeledDataset> {
    synth_manifold_detailed(spec).map(|(data, _)| data)
}

/// As [`synth_manifold`], also returning the intrinsic coordinates of every
/// generated point.
pub fn synth_manifold_detailed(spec: &SynthSpec) -> Result<(LabeledDataset, PointSet)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // rng consumption order is fixed: frame, phase, points, labels/noise.
    let frame = if spec.d < spec.ambient_dim {
        Some(orthonormal_frame(spec.ambient_dim, spec.d, &mut rng))
    } else {
        None
    };
    let phase: f64 = rng.gen_range(0.0..1.0);

    let mut intrinsic = Vec::with_capacity(spec.n * spec.d);
    for _ in 0..spec.n * spec.d {
        intrinsic.push(rng.gen_range(0.0..1.0));
    }
    let intrinsic = PointSet::from_flat(intrinsic, spec.d)?;

    let points = match &frame {
        None => intrinsic.clone(),
        Some(columns) => {
            let mut data = Vec::with_capacity(spec.n * spec.ambient_dim);
            for u in intrinsic.iter() {
                let mut x = vec![0.0; spec.ambient_dim];
                for (j, col) in columns.iter().enumerate() {
                    for (xi, &ci) in x.iter_mut().zip(col) {
                        *xi += u[j] * ci;
                    }
                }
                data.extend_from_slice(&x);
            }
            PointSet::from_flat(data, spec.ambient_dim)?
        }
    };

    let dataset = match spec.mode {
        TaskMode::Classification => {
            let eta_fn = EtaField::new(spec, phase);
            let mut eta = Vec::with_capacity(spec.n);
            let mut bayes = Vec::with_capacity(spec.n);
            let mut labels = Vec::with_capacity(spec.n);
            for u in intrinsic.iter() {
                let probs = eta_fn.eval(u);
                let mut draw: f64 = rng.gen_range(0.0..1.0);
                let mut label = spec.num_classes - 1;
                for (l, &p) in probs.iter().enumerate() {
                    if draw < p {
                        label = l;
                        break;
                    }
                    draw -= p;
                }
                labels.push(label);
                bayes.push(argmax(&probs));
                eta.push(ProbVector::new(probs)?);
            }
            LabeledDataset {
                points,
                labels: LabelSet::classification(labels, spec.num_classes)?,
                truth: Some(GroundTruth::Classification { eta, bayes_labels: bayes }),
                class_names: None,
            }
        }
        TaskMode::Regression => {
            let signal = SignalField::new(spec, phase);
            let mut mean = Vec::with_capacity(spec.n);
            let mut targets = Vec::with_capacity(spec.n);
            for u in intrinsic.iter() {
                let m = signal.eval(u);
                let noise: f64 = StandardNormal.sample(&mut rng);
                mean.push(m);
                targets.push(m + spec.noise_sigma * noise);
            }
            LabeledDataset {
                points,
                labels: LabelSet::regression(targets)?,
                truth: Some(GroundTruth::Regression { mean, noise_sigma: spec.noise_sigma }),
                class_names: None,
            }
        }
    };
    Ok((dataset, intrinsic))
}

/// Plug-in Bayes error: mean of `1 - max_l eta_l(X_i)` for classification,
/// the noise variance for regression.
pub fn bayes_error(dataset: &LabeledDataset) -> Result<f64> {
    match &dataset.truth {
        None => Err(Error::InvalidArgument("dataset carries no ground truth".into())),
        Some(GroundTruth::Classification { eta, .. }) => {
            let sum: f64 = eta.iter().map(|p| 1.0 - p.top()).sum();
            Ok(sum / eta.len() as f64)
        }
        Some(GroundTruth::Regression { noise_sigma, .. }) => Ok(noise_sigma * noise_sigma),
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Positions of the multi-scale band boundaries on the unit circle. Bands
/// step with width `width_max * exp(-decay_rate * t)`; a final sliver
/// narrower than half its nominal width merges into the previous band.
fn band_edges(width_max: f64, decay_rate: f64) -> Vec<f64> {
    let mut edges = vec![0.0f64];
    loop {
        let t = *edges.last().expect("nonempty");
        let next = t + width_max * (-decay_rate * t).exp();
        if next >= 1.0 {
            break;
        }
        edges.push(next);
    }
    let last = *edges.last().expect("nonempty");
    let nominal = width_max * (-decay_rate * last).exp();
    if edges.len() > 1 && 1.0 - last < nominal * 0.5 {
        edges.pop();
    }
    edges.push(1.0);
    edges
}

fn min_band_width(edges: &[f64]) -> f64 {
    edges.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Conditional class probabilities along a projected coordinate.
///
/// The `Power` profile divides the circle `[0,1)` into one bin per class;
/// between the two nearest bin centers the probabilities interpolate as
/// `(1 ± y^exponent) / 2` where `y` is the rescaled distance from the bin
/// boundary. Its frequency is chosen so the field is `(lambda, alpha)`-
/// Hölder: the Lipschitz constant `amplitude * exponent * L * freq` times
/// `diam^(1-alpha)` stays below `lambda`. The `MultiScale` profile walks
/// the circle once with geometrically shrinking alternating bands shaped
/// the same way.
enum EtaField {
    Constant {
        label: usize,
        num_classes: usize,
        noise_flip: f64,
    },
    Power {
        num_classes: usize,
        amplitude: f64,
        exponent: f64,
        freq: f64,
        phase: f64,
        inv_sqrt_d: f64,
        noise_flip: f64,
    },
    MultiScale {
        amplitude: f64,
        exponent: f64,
        edges: Vec<f64>,
        phase: f64,
        inv_d: f64,
        noise_flip: f64,
    },
}

impl EtaField {
    fn new(spec: &SynthSpec, phase: f64) -> Self {
        let diam = (spec.d as f64).sqrt();
        match spec.margin {
            MarginProfile::Constant { label } => EtaField::Constant {
                label,
                num_classes: spec.num_classes,
                noise_flip: spec.noise_flip,
            },
            MarginProfile::Power { amplitude, exponent } => {
                let lipschitz_budget = spec.lambda / diam.powf(1.0 - spec.alpha);
                let denom = amplitude * exponent * spec.num_classes as f64;
                let freq = if denom > 0.0 { lipschitz_budget / denom } else { 0.0 };
                EtaField::Power {
                    num_classes: spec.num_classes,
                    amplitude,
                    exponent,
                    freq,
                    phase,
                    inv_sqrt_d: 1.0 / diam,
                    noise_flip: spec.noise_flip,
                }
            }
            MarginProfile::MultiScale { amplitude, exponent, width_max, decay_rate } => {
                EtaField::MultiScale {
                    amplitude,
                    exponent,
                    edges: band_edges(width_max, decay_rate),
                    phase,
                    inv_d: 1.0 / spec.d as f64,
                    noise_flip: spec.noise_flip,
                }
            }
        }
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        let (mut probs, noise_flip) = match self {
            EtaField::Constant { label, num_classes, noise_flip } => {
                let mut p = vec![0.0; *num_classes];
                p[*label] = 1.0;
                (p, *noise_flip)
            }
            EtaField::Power {
                num_classes,
                amplitude,
                exponent,
                freq,
                phase,
                inv_sqrt_d,
                noise_flip,
            } => {
                let l = *num_classes;
                let proj: f64 = u.iter().sum::<f64>() * inv_sqrt_d;
                let t = (freq * proj + phase).rem_euclid(1.0);
                let pos = t * l as f64;
                let bin = (pos.floor() as usize).min(l - 1);
                let x = (pos - (bin as f64 + 0.5)).abs();
                let neighbor =
                    if pos >= bin as f64 + 0.5 { (bin + 1) % l } else { (bin + l - 1) % l };
                let share = (1.0 - 2.0 * x).max(0.0).powf(*exponent);
                let mut p = vec![(1.0 - amplitude) / l as f64; l];
                p[bin] += amplitude * (1.0 + share) / 2.0;
                p[neighbor] += amplitude * (1.0 - share) / 2.0;
                (p, *noise_flip)
            }
            EtaField::MultiScale { amplitude, exponent, edges, phase, inv_d, noise_flip } => {
                // One traversal of the band circle across the cube.
                let t = (u.iter().sum::<f64>() * inv_d + phase).rem_euclid(1.0);
                let band = edges.partition_point(|&e| e <= t).saturating_sub(1);
                let (lo, hi) = (edges[band], edges[band + 1]);
                let y = (2.0 * (t - lo).min(hi - t) / (hi - lo)).clamp(0.0, 1.0);
                let share = y.powf(*exponent);
                let high = (1.0 + amplitude * share) / 2.0;
                if band % 2 == 0 {
                    (vec![high, 1.0 - high], *noise_flip)
                } else {
                    (vec![1.0 - high, high], *noise_flip)
                }
            }
        };
        if noise_flip > 0.0 {
            let others = (probs.len() - 1) as f64;
            for p in &mut probs {
                *p = (1.0 - noise_flip) * *p + noise_flip * (1.0 - *p) / others;
            }
        }
        probs
    }
}

/// Smooth regression signal `sin(2 pi freq <w, u> + phase)`, with frequency
/// chosen to keep the field `(lambda, alpha)`-Hölder.
struct SignalField {
    freq: f64,
    phase: f64,
    inv_sqrt_d: f64,
}

impl SignalField {
    fn new(spec: &SynthSpec, phase: f64) -> Self {
        let diam = (spec.d as f64).sqrt();
        let lipschitz_budget = spec.lambda / diam.powf(1.0 - spec.alpha);
        SignalField {
            freq: lipschitz_budget / (2.0 * std::f64::consts::PI),
            phase,
            inv_sqrt_d: 1.0 / diam,
        }
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let proj: f64 = u.iter().sum::<f64>() * self.inv_sqrt_d;
        (2.0 * std::f64::consts::PI * (self.freq * proj + self.phase)).sin()
    }
}

/// `count` orthonormal columns in `R^dim` from seeded Gaussian draws
/// (modified Gram-Schmidt).
fn orthonormal_frame(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(count);
    while columns.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for q in &columns {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            columns.push(v);
        }
    }
    columns
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::squared_distance;
    use approx::assert_abs_diff_eq;

    fn base_spec() -> SynthSpec {
        SynthSpec {
            d: 2,
            ambient_dim: 2,
            n: 500,
            alpha: 1.0,
            lambda: 3.0,
            margin: MarginProfile::Power { amplitude: 0.9, exponent: 1.0 },
            num_classes: 2,
            noise_flip: 0.0,
            noise_sigma: 0.0,
            mode: TaskMode::Classification,
            seed: 42,
        }
    }

    #[test]
    fn constant_profile_gives_zero_bayes_error() {
        let spec = SynthSpec {
            d: 2,
            ambient_dim: 2,
            margin: MarginProfile::Constant { label: 0 },
            ..base_spec()
        };
        let data = synth_manifold(&spec).unwrap();
        match &data.labels {
            LabelSet::Classification { labels, .. } => assert!(labels.iter().all(|&y| y == 0)),
            _ => unreachable!(),
        }
        assert_eq!(bayes_error(&data).unwrap(), 0.0);
    }

    #[test]
    fn zero_amplitude_gives_pure_noise() {
        let spec = SynthSpec {
            margin: MarginProfile::Power { amplitude: 0.0, exponent: 1.0 },
            n: 400,
            ..base_spec()
        };
        let data = synth_manifold(&spec).unwrap();
        assert_abs_diff_eq!(bayes_error(&data).unwrap(), 0.5, epsilon = 1e-12);
        match &data.truth {
            Some(GroundTruth::Classification { eta, .. }) => {
                for p in eta {
                    assert_eq!(p.entries(), &[0.5, 0.5]);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn embedding_is_isometric() {
        let spec = SynthSpec { d: 1, ambient_dim: 3, n: 60, ..base_spec() };
        let (data, intrinsic) = synth_manifold_detailed(&spec).unwrap();
        assert_eq!(data.dim(), 3);
        for i in 0..intrinsic.len() {
            for j in (i + 1)..intrinsic.len() {
                let da = squared_distance(data.points.point(i), data.points.point(j)).sqrt();
                let db = squared_distance(intrinsic.point(i), intrinsic.point(j)).sqrt();
                assert_abs_diff_eq!(da, db, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn generation_is_bit_reproducible() {
        let spec = SynthSpec { noise_flip: 0.2, ..base_spec() };
        let a = synth_manifold(&spec).unwrap();
        let b = synth_manifold(&spec).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn eta_is_holder_on_sampled_pairs() {
        use rand::Rng;
        for (alpha, exponent, flip) in [(1.0, 1.0, 0.0), (0.7, 4.0, 0.1)] {
            let spec = SynthSpec {
                d: 2,
                ambient_dim: 4,
                n: 2000,
                alpha,
                lambda: 2.5,
                margin: MarginProfile::Power { amplitude: 0.8, exponent },
                noise_flip: flip,
                ..base_spec()
            };
            let data = synth_manifold(&spec).unwrap();
            let eta = match &data.truth {
                Some(GroundTruth::Classification { eta, .. }) => eta,
                _ => unreachable!(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..10_000 {
                let i = rng.gen_range(0..data.len());
                let j = rng.gen_range(0..data.len());
                let dist = squared_distance(data.points.point(i), data.points.point(j)).sqrt();
                let gap = eta[i]
                    .entries()
                    .iter()
                    .zip(eta[j].entries())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(
                    gap <= spec.lambda * dist.powf(alpha) + 1e-9,
                    "Hölder violated: gap {gap} at distance {dist} (alpha {alpha})"
                );
            }
        }
    }

    #[test]
    fn ball_mass_respects_cube_constant() {
        use rand::Rng;
        let spec = SynthSpec { d: 2, ambient_dim: 2, n: 20_000, ..base_spec() };
        let data = synth_manifold(&spec).unwrap();
        let c_d = uniform_cube_cd(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let center = data.points.point(rng.gen_range(0..data.len())).to_vec();
            let r: f64 = rng.gen_range(0.05..0.8);
            let inside = data
                .points
                .iter()
                .filter(|p| squared_distance(p, &center) <= r * r)
                .count();
            let mass = inside as f64 / data.len() as f64;
            assert!(
                mass >= 0.9 * c_d * r.powi(2),
                "ball mass {mass} below 0.9 * C_d r^d at r={r}"
            );
        }
    }

    #[test]
    fn label_frequencies_track_eta() {
        let spec = SynthSpec { n: 40_000, noise_flip: 0.1, ..base_spec() };
        let data = synth_manifold(&spec).unwrap();
        let eta = match &data.truth {
            Some(GroundTruth::Classification { eta, .. }) => eta,
            _ => unreachable!(),
        };
        let expected: f64 = eta.iter().map(|p| p.entries()[1]).sum::<f64>() / data.len() as f64;
        let observed = match &data.labels {
            LabelSet::Classification { labels, .. } => {
                labels.iter().filter(|&&y| y == 1).count() as f64 / data.len() as f64
            }
            _ => unreachable!(),
        };
        assert!((expected - observed).abs() < 0.01);
    }

    #[test]
    fn regression_truth_and_noise() {
        let spec = SynthSpec {
            mode: TaskMode::Regression,
            noise_sigma: 0.5,
            n: 20_000,
            ..base_spec()
        };
        let data = synth_manifold(&spec).unwrap();
        assert_eq!(bayes_error(&data).unwrap(), 0.25);
        let (mean, targets) = match (&data.truth, &data.labels) {
            (Some(GroundTruth::Regression { mean, .. }), LabelSet::Regression { targets }) => {
                (mean, targets)
            }
            _ => unreachable!(),
        };
        let mse: f64 = mean
            .iter()
            .zip(targets)
            .map(|(m, t)| (m - t) * (m - t))
            .sum::<f64>()
            / mean.len() as f64;
        assert!((mse - 0.25).abs() < 0.02, "target noise variance {mse} off from 0.25");
    }

    #[test]
    fn bayes_error_matches_hand_sum() {
        let spec = SynthSpec { n: 200, noise_flip: 0.15, ..base_spec() };
        let data = synth_manifold(&spec).unwrap();
        let eta = match &data.truth {
            Some(GroundTruth::Classification { eta, .. }) => eta,
            _ => unreachable!(),
        };
        let mut hand = 0.0;
        for p in eta {
            let top = p.entries().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            hand += 1.0 - top;
        }
        hand /= eta.len() as f64;
        assert_abs_diff_eq!(bayes_error(&data).unwrap(), hand, epsilon = 1e-12);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(synth_manifold(&SynthSpec { d: 0, ..base_spec() }).is_err());
        assert!(synth_manifold(&SynthSpec { d: 3, ambient_dim: 2, ..base_spec() }).is_err());
        assert!(synth_manifold(&SynthSpec { alpha: 0.0, ..base_spec() }).is_err());
        assert!(synth_manifold(&SynthSpec { alpha: 1.5, ..base_spec() }).is_err());
        assert!(synth_manifold(&SynthSpec { lambda: 0.0, ..base_spec() }).is_err());
        assert!(synth_manifold(&SynthSpec { noise_flip: 0.5, ..base_spec() }).is_err());
        assert!(synth_manifold(&SynthSpec {
            margin: MarginProfile::Power { amplitude: 1.5, exponent: 1.0 },
            ..base_spec()
        })
        .is_err());
        assert!(synth_manifold(&SynthSpec {
            margin: MarginProfile::Constant { label: 5 },
            ..base_spec()
        })
        .is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_abs_diff_eq!(unit_ball_volume(1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unit_ball_volume(2), std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uniform_cube_cd(1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uniform_cube_cd(2), std::f64::consts::PI / 4.0, epsilon = 1e-12);
    }
}
