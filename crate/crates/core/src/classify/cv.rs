//! Leave-one-out cross-validation, ROC sweeps and TPR-at-FPR tables.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{predict_score, ClassifierConfig, ClassifyError, Result, TrainedModel};
use crate::features::LabeledDataset;

/// FPR levels reported by default.
pub const DEFAULT_FPR_TARGETS: [f64; 4] = [0.1, 0.15, 0.2, 0.3];

/// Anything that can be fit on a training fold and score a held-out row.
pub trait Classifier: Sync {
    type Model: Send;

    fn fit(&self, x: &DMatrix<f64>, y: &[u8]) -> Result<Self::Model>;

    fn score(&self, model: &Self::Model, x: &[f64]) -> Result<f64>;

    /// Scores strictly above this are predicted as class 1.
    fn decision_point(&self) -> f64;
}

impl Classifier for ClassifierConfig {
    type Model = TrainedModel;

    fn fit(&self, x: &DMatrix<f64>, y: &[u8]) -> Result<TrainedModel> {
        self.train(x, y)
    }

    fn score(&self, model: &TrainedModel, x: &[f64]) -> Result<f64> {
        predict_score(model, x)
    }

    fn decision_point(&self) -> f64 {
        self.kind.decision_point()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectScore {
    pub subject_id: String,
    pub true_label: u8,
    pub score: f64,
    pub predicted: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Requested FPR → achieved TPR, kept in request order. Serializes as a
/// JSON object keyed by the FPR written as a decimal string.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TprTable(pub Vec<(f64, f64)>);

impl TprTable {
    pub fn get(&self, fpr: f64) -> Option<f64> {
        self.0.iter().find(|(f, _)| *f == fpr).map(|(_, t)| *t)
    }

    pub fn targets(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|(f, _)| *f)
    }
}

impl Serialize for TprTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (fpr, tpr) in &self.0 {
            map.serialize_entry(&fpr.to_string(), tpr)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for TprTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct TableVisitor;

        impl<'de> Visitor<'de> for TableVisitor {
            type Value = TprTable;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from FPR strings to TPR values")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<TprTable, A::Error> {
                let mut rows = Vec::new();
                while let Some((key, tpr)) = access.next_entry::<String, f64>()? {
                    let fpr = key
                        .parse::<f64>()
                        .map_err(|_| serde::de::Error::custom(format!("FPR key {key:?} is not a number")))?;
                    rows.push((fpr, tpr));
                }
                Ok(TprTable(rows))
            }
        }

        d.deserialize_map(TableVisitor)
    }
}

/// Leave-one-out results over a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub per_subject: Vec<SubjectScore>,
    pub accuracy: f64,
    /// Binomial standard error `√(acc·(1−acc)/N)`.
    pub accuracy_dispersion: f64,
    pub roc: Vec<RocPoint>,
    pub tpr_at_fpr: TprTable,
}

impl CvReport {
    /// Two-column plain-text TPR table, one row per FPR target.
    pub fn tpr_table_text(&self, title: &str) -> String {
        let mut out = format!("{:<8} {:>12}\n", "FPR", title);
        for (fpr, tpr) in &self.tpr_at_fpr.0 {
            out.push_str(&format!("{:<8} {:>12.2}\n", fpr, tpr));
        }
        out.push_str(&format!(
            "{:<8} {:>12}\n",
            "acc",
            format!("{:.2} ± {:.2}", self.accuracy, self.accuracy_dispersion)
        ));
        out
    }
}

/// Trains on every row except `held_out`, refitting standardization on
/// that fold only.
pub fn fold_model<C: Classifier>(ds: &LabeledDataset, clf: &C, held_out: usize) -> Result<C::Model> {
    let x = ds.matrix().clone().remove_row(held_out);
    let y: Vec<u8> = ds
        .labels()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != held_out)
        .map(|(_, &l)| l)
        .collect();
    clf.fit(&x, &y)
}

fn check_population(ds: &LabeledDataset) -> Result<()> {
    let counts = ds.class_counts();
    for (label, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(ClassifyError::ClassUnderpopulated {
                label: label as u8,
                count,
            });
        }
    }
    Ok(())
}

/// Leave-one-out evaluation of a built-in classifier at the default FPR
/// targets.
pub fn loocv(ds: &LabeledDataset, cfg: &ClassifierConfig) -> Result<CvReport> {
    loocv_with_targets(ds, cfg, &DEFAULT_FPR_TARGETS)
}

pub fn loocv_with_targets(ds: &LabeledDataset, cfg: &ClassifierConfig, targets: &[f64]) -> Result<CvReport> {
    cfg.validate()?;
    check_population(ds)?;
    loocv_with(ds, cfg, targets)
}

/// Generic leave-one-out loop. Folds run in parallel; the report does not
/// depend on scheduling. Class populations are not checked here, so a
/// classifier that tolerates single-class folds can be evaluated on any
/// dataset with both classes present overall.
pub fn loocv_with<C: Classifier>(ds: &LabeledDataset, clf: &C, targets: &[f64]) -> Result<CvReport> {
    let n = ds.n_subjects();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let model = fold_model(ds, clf, i)?;
            let row: Vec<f64> = ds.matrix().row(i).iter().copied().collect();
            clf.score(&model, &row)
        })
        .collect::<Result<_>>()?;

    let per_subject: Vec<SubjectScore> = scores
        .iter()
        .enumerate()
        .map(|(i, &score)| SubjectScore {
            subject_id: ds.subject_ids()[i].clone(),
            true_label: ds.labels()[i],
            score,
            predicted: u8::from(score > clf.decision_point()),
        })
        .collect();
    let correct = per_subject.iter().filter(|s| s.predicted == s.true_label).count();
    let accuracy = correct as f64 / n as f64;
    let roc = roc_points(&scores, ds.labels())?;
    let tpr_at_fpr = tpr_at_fpr(&roc, targets)?;
    Ok(CvReport {
        per_subject,
        accuracy,
        accuracy_dispersion: (accuracy * (1.0 - accuracy) / n as f64).sqrt(),
        roc,
        tpr_at_fpr,
    })
}

/// ROC sweep over descending unique scores, from `(0,0)` to `(1,1)`.
/// Equal scores share one threshold. Class 1 is the positive class.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<RocPoint>> {
    if scores.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch(scores.len(), labels.len()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(ClassifyError::SingleClassLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(points)
}

/// Largest TPR among ROC points with `fpr <= target` (no interpolation).
pub fn tpr_at_fpr(roc: &[RocPoint], targets: &[f64]) -> Result<TprTable> {
    targets
        .iter()
        .map(|&f| {
            if !(0.0..=1.0).contains(&f) {
                return Err(ClassifyError::InvalidTarget(f));
            }
            let tpr = roc
                .iter()
                .filter(|p| p.fpr <= f + 1e-12)
                .map(|p| p.tpr)
                .fold(0.0, f64::max);
            Ok((f, tpr))
        })
        .collect::<Result<Vec<_>>>()
        .map(TprTable)
}
