//! Nearest-neighbor prediction toolkit built around denoised 1-NN
//! subsample ensembles ("subNN"), with k-NN / 1-NN / bagged-1-NN baselines,
//! cross-validated selection of the denoising parameter, synthetic data
//! generators with known ground truth, and a benchmark harness reporting
//! relative errors and prediction times.

pub mod bench;
pub mod cli;
pub mod cv;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod knn;
pub mod model_io;
pub mod nn;

pub use cv::{cross_validate_k, stage1_grid, stage2_grid, CvConfig, CvResult};
pub use data::synth::{
    bayes_error, synth_manifold, uniform_cube_cd, unit_ball_volume, MarginProfile, SynthSpec,
};
pub use data::{split, standardize, GroundTruth, LabeledDataset, Standardizer};
pub use ensemble::{
    draw_subsample, submodel_seeds, Aggregation, BaggedModel, BatchTiming, DenoisedModel,
    Prediction, SubNNModel,
};
pub use error::{Error, Result};
pub use knn::{rk_theoretical_bound, KnnModel, LabelSet, ProbVector, TaskMode, TheoryParams};
pub use nn::{IndexMode, NNIndex, NeighborList, PointSet};
