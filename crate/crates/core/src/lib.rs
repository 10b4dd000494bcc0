//! Feature-selection optimization toolkit: a particle-swarm wrapper over
//! from-scratch classifiers with stratified evaluation, significance tests
//! and Shapley attributions. Everything is deterministic given a seed.

// triangular factorizations and symmetric fills are index algorithms
#![allow(clippy::needless_range_loop)]

pub mod classifiers;
pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
mod linalg;
pub mod preprocess;
pub mod pso;
pub mod rng;
pub mod stats;

pub use classifiers::{fit, FittedModel, ModelFamily, ModelSpec};
pub use data::{DataTable, FeatureMask};
pub use error::{Error, Result};
pub use eval::{
    auc_roc, confusion, cross_validate, metrics, stratified_kfold, Averaging, ConfusionCounts,
    CvReport, FoldAssignment, MetricsReport,
};
pub use explain::{exact_shapley, kernel_shap, summarize, Attribution, ScoreModel, ShapSummary};
pub use preprocess::{
    apply_scaler, encode_labels, fit_scaler, iqr_bounds, load_csv, preprocess, stratified_split,
    winsorize, FitScope, Preprocessed, ScalerParams, SplitSpec, WinsorBounds,
};
pub use pso::{
    decode_mask, fitness, mutual_information, optimize, schedule, update_particle,
    FitnessEvalMode, Particle, PsoResult, SwarmConfig,
};
pub use stats::{
    chi_square_independence, cohens_d, paired_t_test, pairwise_t_tests, t_cdf, EffectSize,
    PairwiseTTest, TTestResult,
};
