//! Two-class classifiers and their leave-one-out evaluation.
//!
//! Three model families are available: L2-regularized logistic regression
//! and a linear soft-margin SVM, both trained by deterministic full-batch
//! (sub)gradient descent on standardized features, and a CART random
//! forest driven by a single 64-bit seed.

mod cv;
mod forest;
mod linear;
mod standardize;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use cv::{
    fold_model, loocv, loocv_with, loocv_with_targets, roc_points, tpr_at_fpr, Classifier, CvReport,
    RocPoint, SubjectScore, TprTable, DEFAULT_FPR_TARGETS,
};
pub use forest::{gini, DecisionTree, Forest, TreeNode, TreeParams};
pub use linear::{
    hinge_gradient, hinge_objective, linear_loss_trace, logistic_gradient, logistic_objective,
    sigmoid, LinearModel,
};
pub use standardize::{standardize_fit, Standardizer, MIN_STD};

use crate::kv;

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("training loss became non-finite at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(
        "class {label} has {count} subject(s); leave-one-out needs at least 2 per class \
         (and 4 subjects overall) so every training fold keeps both classes"
    )]
    ClassUnderpopulated { label: u8, count: usize },
    #[error("labels contain a single class; ROC is undefined")]
    SingleClassLabels,
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
    #[error("FPR target {0} is outside [0, 1]")]
    InvalidTarget(f64),
    #[error("{0} scores for {1} labels")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    LogisticRegression,
    LinearSvm,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::LogisticRegression,
        ClassifierKind::LinearSvm,
        ClassifierKind::RandomForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::RandomForest => "random_forest",
        }
    }

    /// Score above which a subject is predicted as class 1.
    pub fn decision_point(self) -> f64 {
        match self {
            ClassifierKind::LinearSvm => 0.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logistic_regression" | "lr" | "logreg" => Ok(Self::LogisticRegression),
            "linear_svm" | "svm" => Ok(Self::LinearSvm),
            "random_forest" | "rf" => Ok(Self::RandomForest),
            other => Err(ClassifyError::InvalidConfig(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Candidate features examined at each forest split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeaturesPerSplit {
    /// `⌈√P⌉`
    Sqrt,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, n_features: usize) -> usize {
        match self {
            FeaturesPerSplit::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeaturesPerSplit::Count(k) => k,
        }
        .clamp(1, n_features.max(1))
    }
}

impl fmt::Display for FeaturesPerSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeaturesPerSplit::Sqrt => f.write_str("sqrt"),
            FeaturesPerSplit::Count(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for FeaturesPerSplit {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("sqrt") {
            return Ok(Self::Sqrt);
        }
        match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Self::Count(k)),
            _ => Err(ClassifyError::InvalidConfig(format!(
                "features_per_split must be `sqrt` or a positive integer, got {s:?}"
            ))),
        }
    }
}

impl Serialize for FeaturesPerSplit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FeaturesPerSplit::Sqrt => s.serialize_str("sqrt"),
            FeaturesPerSplit::Count(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for FeaturesPerSplit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(k) => Ok(FeaturesPerSplit::Count(k as usize)),
            Repr::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub features_per_split: FeaturesPerSplit,
    pub rng_seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::LogisticRegression,
            l2_lambda: 1e-2,
            epochs: 500,
            learning_rate: 0.1,
            trees: 100,
            max_depth: None,
            features_per_split: FeaturesPerSplit::Sqrt,
            rng_seed: 0,
        }
    }
}

impl ClassifierConfig {
    pub fn with_kind(kind: ClassifierKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    /// All fields are validated regardless of `kind`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ClassifyError::InvalidConfig(m.to_string()));
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return bad("l2_lambda must be finite and >= 0");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and > 0");
        }
        if self.trees == 0 {
            return bad("trees must be positive");
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be positive or none");
        }
        if self.features_per_split == FeaturesPerSplit::Count(0) {
            return bad("features_per_split must be positive");
        }
        Ok(())
    }

    /// Overrides fields present in a key=value map: `classifier`,
    /// `l2_lambda`, `epochs`, `learning_rate`, `trees`, `max_depth`,
    /// `features_per_split`, `seed`. Other keys are ignored.
    pub fn apply_map(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| ClassifyError::InvalidConfig(format!("bad value for {key}: {v:?}")))
        }
        if let Some(v) = map.get("classifier") {
            self.kind = v.parse()?;
        }
        if let Some(v) = map.get("l2_lambda") {
            self.l2_lambda = num("l2_lambda", v)?;
        }
        if let Some(v) = map.get("epochs") {
            self.epochs = num("epochs", v)?;
        }
        if let Some(v) = map.get("learning_rate") {
            self.learning_rate = num("learning_rate", v)?;
        }
        if let Some(v) = map.get("trees") {
            self.trees = num("trees", v)?;
        }
        if let Some(v) = map.get("max_depth") {
            self.max_depth = if v.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(num("max_depth", v)?)
            };
        }
        if let Some(v) = map.get("features_per_split") {
            self.features_per_split = v.parse()?;
        }
        if let Some(v) = map.get("seed") {
            self.rng_seed = num("seed", v)?;
        }
        self.validate()
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let map = kv::parse(text).map_err(|e| ClassifyError::InvalidConfig(e.to_string()))?;
        let mut cfg = Self::default();
        cfg.apply_map(&map)?;
        Ok(cfg)
    }

    pub fn to_kv_text(&self) -> String {
        format!(
            "classifier={}\nl2_lambda={}\nepochs={}\nlearning_rate={}\ntrees={}\nmax_depth={}\nfeatures_per_split={}\nseed={}\n",
            self.kind,
            self.l2_lambda,
            self.epochs,
            self.learning_rate,
            self.trees,
            self.max_depth.map_or_else(|| "none".to_string(), |d| d.to_string()),
            self.features_per_split,
            self.rng_seed,
        )
    }

    /// Trains the configured model on `x` (rows are subjects).
    pub fn train(&self, x: &DMatrix<f64>, y: &[u8]) -> Result<TrainedModel> {
        match self.kind {
            ClassifierKind::LogisticRegression => train_logreg(x, y, self),
            ClassifierKind::LinearSvm => train_linear_svm(x, y, self),
            ClassifierKind::RandomForest => train_random_forest(x, y, self),
        }
    }
}

pub(crate) fn check_two_classes(y: &[u8]) -> Result<()> {
    let ones = y.iter().filter(|&&l| l == 1).count();
    if ones == 0 || ones == y.len() {
        Err(ClassifyError::SingleClassTraining)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Linear(LinearModel),
    Forest(Forest),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Linear(m) => m.kind,
            TrainedModel::Forest(_) => ClassifierKind::RandomForest,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Linear(m) => m.weights.len(),
            TrainedModel::Forest(f) => f.n_features,
        }
    }

    /// Predicted label for a score; scores equal to the decision point go
    /// to class 0.
    pub fn predict_label(&self, score: f64) -> u8 {
        u8::from(score > self.kind().decision_point())
    }
}

pub fn train_logreg(x: &DMatrix<f64>, y: &[u8], cfg: &ClassifierConfig) -> Result<TrainedModel> {
    if cfg.kind != ClassifierKind::LogisticRegression {
        return Err(ClassifyError::InvalidConfig(format!("expected logistic_regression, got {}", cfg.kind)));
    }
    linear::train(x, y, cfg).map(|(m, _)| TrainedModel::Linear(m))
}

pub fn train_linear_svm(x: &DMatrix<f64>, y: &[u8], cfg: &ClassifierConfig) -> Result<TrainedModel> {
    if cfg.kind != ClassifierKind::LinearSvm {
        return Err(ClassifyError::InvalidConfig(format!("expected linear_svm, got {}", cfg.kind)));
    }
    linear::train(x, y, cfg).map(|(m, _)| TrainedModel::Linear(m))
}

pub fn train_random_forest(x: &DMatrix<f64>, y: &[u8], cfg: &ClassifierConfig) -> Result<TrainedModel> {
    if cfg.kind != ClassifierKind::RandomForest {
        return Err(ClassifyError::InvalidConfig(format!("expected random_forest, got {}", cfg.kind)));
    }
    forest::train(x, y, cfg).map(TrainedModel::Forest)
}

/// Continuous score: probability for logistic regression, raw margin for
/// the SVM, fraction of class-1 votes for the forest.
pub fn predict_score(model: &TrainedModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features() {
        return Err(ClassifyError::DimensionMismatch {
            expected: model.n_features(),
            found: x.len(),
        });
    }
    Ok(match model {
        TrainedModel::Linear(m) => m.score(x),
        TrainedModel::Forest(f) => f.score(x),
    })
}
