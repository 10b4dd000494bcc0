//! From-scratch classifier families behind a single train/predict/score
//! contract. A [`ModelSpec`] names the family, its hyperparameters and the
//! seed; [`fit`] produces an immutable [`FittedModel`] exposing hard
//! predictions and real-valued scores (higher = more class 1).

mod bayes;
mod discriminant;
mod ensemble;
mod linear;
mod mlp;
mod neighbors;
mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use tree::TreeNode;

/// The implemented classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Logistic,
    LogisticCv,
    Ridge,
    RidgeCv,
    SgdHinge,
    LinearSvm,
    Perceptron,
    PassiveAggressive,
    DecisionTree,
    ExtraTrees,
    RandomForest,
    Bagging,
    AdaBoost,
    GaussianNb,
    BernoulliNb,
    MultinomialNb,
    ComplementNb,
    Knn,
    NearestCentroid,
    Lda,
    Qda,
    Mlp,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 22] = [
        ModelFamily::Logistic,
        ModelFamily::LogisticCv,
        ModelFamily::Ridge,
        ModelFamily::RidgeCv,
        ModelFamily::SgdHinge,
        ModelFamily::LinearSvm,
        ModelFamily::Perceptron,
        ModelFamily::PassiveAggressive,
        ModelFamily::DecisionTree,
        ModelFamily::ExtraTrees,
        ModelFamily::RandomForest,
        ModelFamily::Bagging,
        ModelFamily::AdaBoost,
        ModelFamily::GaussianNb,
        ModelFamily::BernoulliNb,
        ModelFamily::MultinomialNb,
        ModelFamily::ComplementNb,
        ModelFamily::Knn,
        ModelFamily::NearestCentroid,
        ModelFamily::Lda,
        ModelFamily::Qda,
        ModelFamily::Mlp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Logistic => "logistic",
            ModelFamily::LogisticCv => "logistic_cv",
            ModelFamily::Ridge => "ridge",
            ModelFamily::RidgeCv => "ridge_cv",
            ModelFamily::SgdHinge => "sgd_hinge",
            ModelFamily::LinearSvm => "linear_svm",
            ModelFamily::Perceptron => "perceptron",
            ModelFamily::PassiveAggressive => "passive_aggressive",
            ModelFamily::DecisionTree => "decision_tree",
            ModelFamily::ExtraTrees => "extra_trees",
            ModelFamily::RandomForest => "random_forest",
            ModelFamily::Bagging => "bagging",
            ModelFamily::AdaBoost => "adaboost",
            ModelFamily::GaussianNb => "gaussian_nb",
            ModelFamily::BernoulliNb => "bernoulli_nb",
            ModelFamily::MultinomialNb => "multinomial_nb",
            ModelFamily::ComplementNb => "complement_nb",
            ModelFamily::Knn => "knn",
            ModelFamily::NearestCentroid => "nearest_centroid",
            ModelFamily::Lda => "lda",
            ModelFamily::Qda => "qda",
            ModelFamily::Mlp => "mlp",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    /// Probabilistic families score in [0,1] with a 0.5 decision threshold;
    /// margin families score a signed decision value thresholded at 0.
    pub fn is_probabilistic(&self) -> bool {
        !matches!(
            self,
            ModelFamily::Ridge
                | ModelFamily::RidgeCv
                | ModelFamily::SgdHinge
                | ModelFamily::LinearSvm
                | ModelFamily::Perceptron
                | ModelFamily::PassiveAggressive
                | ModelFamily::AdaBoost
                | ModelFamily::NearestCentroid
        )
    }

    /// Decision threshold on the score; ties resolve to class 0.
    pub fn threshold(&self) -> f64 {
        if self.is_probabilistic() {
            0.5
        } else {
            0.0
        }
    }

    /// Families whose likelihood model requires non-negative features.
    pub fn requires_nonnegative(&self) -> bool {
        matches!(self, ModelFamily::MultinomialNb | ModelFamily::ComplementNb)
    }

    fn allowed_hyperparameters(&self) -> &'static [&'static str] {
        match self {
            ModelFamily::Logistic => &["lambda", "learning_rate", "epochs"],
            ModelFamily::LogisticCv => &["folds", "learning_rate", "epochs"],
            ModelFamily::Ridge => &["lambda"],
            ModelFamily::RidgeCv => &["folds"],
            ModelFamily::SgdHinge | ModelFamily::LinearSvm => {
                &["lambda", "learning_rate", "epochs"]
            }
            ModelFamily::Perceptron => &["learning_rate", "epochs"],
            ModelFamily::PassiveAggressive => &["c", "epochs"],
            ModelFamily::DecisionTree => &["max_depth", "min_samples_split"],
            ModelFamily::ExtraTrees
            | ModelFamily::RandomForest
            | ModelFamily::Bagging => &["n_trees", "max_depth", "min_samples_split"],
            ModelFamily::AdaBoost => &["n_rounds"],
            ModelFamily::GaussianNb | ModelFamily::NearestCentroid | ModelFamily::Lda | ModelFamily::Qda => &[],
            ModelFamily::BernoulliNb => &["alpha", "binarize"],
            ModelFamily::MultinomialNb | ModelFamily::ComplementNb => &["alpha"],
            ModelFamily::Knn => &["k"],
            ModelFamily::Mlp => &["hidden", "learning_rate", "epochs"],
        }
    }
}

/// Declarative classifier choice: family, hyperparameter overrides, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        Self {
            family,
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.hyperparameters.insert(name.to_string(), value);
        self
    }

    pub(crate) fn param(&self, name: &str, default: f64) -> f64 {
        self.hyperparameters.get(name).copied().unwrap_or(default)
    }

    pub(crate) fn param_usize(&self, name: &str, default: usize) -> usize {
        self.param(name, default as f64).max(0.0) as usize
    }

    fn validate(&self) -> Result<()> {
        let allowed = self.family.allowed_hyperparameters();
        for name in self.hyperparameters.keys() {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::UnknownHyperparameter {
                    family: self.family.name().to_string(),
                    name: name.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Learned parameters, one variant per family group.
#[derive(Debug, Clone)]
pub(crate) enum ModelParams {
    /// Degenerate single-class training data.
    Constant { class: u8 },
    /// Linear score `w.x + b`, optionally squashed through a sigmoid.
    Linear {
        weights: Vec<f64>,
        bias: f64,
        sigmoid: bool,
    },
    Tree(tree::TreeNode),
    /// Majority-vote ensemble of trees.
    Forest { trees: Vec<tree::TreeNode> },
    AdaBoost { stumps: Vec<ensemble::WeightedStump> },
    GaussianNb(bayes::GaussianNbParams),
    BernoulliNb(bayes::BernoulliNbParams),
    MultinomialNb(bayes::MultinomialNbParams),
    ComplementNb(bayes::ComplementNbParams),
    Knn {
        x: Vec<Vec<f64>>,
        y: Vec<u8>,
        k: usize,
    },
    NearestCentroid { centroids: [Vec<f64>; 2] },
    Lda(discriminant::LdaParams),
    Qda(discriminant::QdaParams),
    Mlp(mlp::MlpParams),
}

/// A trained classifier. Immutable; safe to share across threads.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub feature_count: usize,
    pub(crate) params: ModelParams,
}

/// Trains `spec` on `(x, y)`. Deterministic given `(spec, x, y)`.
pub fn fit(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<FittedModel> {
    spec.validate()?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput("empty training set".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: x.len(),
        });
    }
    let d = x[0].len();
    if d == 0 {
        return Err(Error::EmptyInput("zero feature columns".into()));
    }
    for row in x {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
    }
    if spec.family.requires_nonnegative() {
        for (i, row) in x.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::NegativeFeature {
                        family: spec.family.name().to_string(),
                        row: i,
                        column: j,
                        value: v,
                    });
                }
            }
        }
    }

    let n_pos = y.iter().filter(|&&l| l == 1).count();
    if n_pos == 0 || n_pos == y.len() {
        return Ok(FittedModel {
            spec: spec.clone(),
            feature_count: d,
            params: ModelParams::Constant { class: y[0] },
        });
    }

    let params = match spec.family {
        ModelFamily::Logistic => linear::fit_logistic(spec, x, y, spec.param("lambda", 0.0))?,
        ModelFamily::LogisticCv => linear::fit_logistic_cv(spec, x, y)?,
        ModelFamily::Ridge => linear::fit_ridge(spec, x, y, spec.param("lambda", 1.0))?,
        ModelFamily::RidgeCv => linear::fit_ridge_cv(spec, x, y)?,
        ModelFamily::SgdHinge => linear::fit_sgd_hinge(spec, x, y)?,
        ModelFamily::LinearSvm => linear::fit_linear_svm(spec, x, y)?,
        ModelFamily::Perceptron => linear::fit_perceptron(spec, x, y)?,
        ModelFamily::PassiveAggressive => linear::fit_passive_aggressive(spec, x, y)?,
        ModelFamily::DecisionTree => tree::fit_decision_tree(spec, x, y)?,
        ModelFamily::ExtraTrees => ensemble::fit_extra_trees(spec, x, y)?,
        ModelFamily::RandomForest => ensemble::fit_random_forest(spec, x, y)?,
        ModelFamily::Bagging => ensemble::fit_bagging(spec, x, y)?,
        ModelFamily::AdaBoost => ensemble::fit_adaboost(spec, x, y)?,
        ModelFamily::GaussianNb => bayes::fit_gaussian(x, y)?,
        ModelFamily::BernoulliNb => bayes::fit_bernoulli(spec, x, y)?,
        ModelFamily::MultinomialNb => bayes::fit_multinomial(spec, x, y)?,
        ModelFamily::ComplementNb => bayes::fit_complement(spec, x, y)?,
        ModelFamily::Knn => neighbors::fit_knn(spec, x, y),
        ModelFamily::NearestCentroid => neighbors::fit_nearest_centroid(x, y),
        ModelFamily::Lda => discriminant::fit_lda(x, y)?,
        ModelFamily::Qda => discriminant::fit_qda(x, y)?,
        ModelFamily::Mlp => mlp::fit_mlp(spec, x, y)?,
    };
    Ok(FittedModel {
        spec: spec.clone(),
        feature_count: d,
        params,
    })
}

impl FittedModel {
    fn check_width(&self, x: &[Vec<f64>]) -> Result<()> {
        for row in x {
            if row.len() != self.feature_count {
                return Err(Error::DimensionMismatch {
                    expected: self.feature_count,
                    got: row.len(),
                });
            }
        }
        Ok(())
    }

    /// Real-valued scores, higher = more class 1. Probabilistic families
    /// return `P(y = 1 | x)`; margin families a signed decision value.
    pub fn predict_score(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_width(x)?;
        Ok(x.iter().map(|row| self.score_row(row)).collect())
    }

    /// Hard 0/1 predictions: `score > threshold`, ties to class 0.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<u8>> {
        let tau = self.spec.family.threshold();
        Ok(self
            .predict_score(x)?
            .into_iter()
            .map(|s| u8::from(s > tau))
            .collect())
    }

    /// Fraction of rows predicted correctly.
    pub fn accuracy(&self, x: &[Vec<f64>], y: &[u8]) -> Result<f64> {
        let pred = self.predict(x)?;
        let correct = pred.iter().zip(y).filter(|(p, t)| p == t).count();
        Ok(correct as f64 / y.len() as f64)
    }

    pub(crate) fn score_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Constant { class } => {
                let positive = *class == 1;
                if self.spec.family.is_probabilistic() {
                    if positive {
                        1.0
                    } else {
                        0.0
                    }
                } else if positive {
                    1.0
                } else {
                    -1.0
                }
            }
            ModelParams::Linear {
                weights,
                bias,
                sigmoid,
            } => {
                let z = crate::linalg::dot(weights, row) + bias;
                if *sigmoid {
                    linear::sigmoid(z)
                } else {
                    z
                }
            }
            ModelParams::Tree(root) => root.positive_fraction(row),
            ModelParams::Forest { trees } => {
                let votes = trees
                    .iter()
                    .filter(|t| t.positive_fraction(row) > 0.5)
                    .count();
                votes as f64 / trees.len() as f64
            }
            ModelParams::AdaBoost { stumps } => ensemble::adaboost_score(stumps, row),
            ModelParams::GaussianNb(p) => p.posterior(row),
            ModelParams::BernoulliNb(p) => p.posterior(row),
            ModelParams::MultinomialNb(p) => p.posterior(row),
            ModelParams::ComplementNb(p) => p.posterior(row),
            ModelParams::Knn { x, y, k } => neighbors::knn_score(x, y, *k, row),
            ModelParams::NearestCentroid { centroids } => {
                neighbors::centroid_score(centroids, row)
            }
            ModelParams::Lda(p) => p.posterior(row),
            ModelParams::Qda(p) => p.posterior(row),
            ModelParams::Mlp(p) => p.forward(row),
        }
    }
}
