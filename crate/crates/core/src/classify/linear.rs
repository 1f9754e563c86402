use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::standardize::{standardize_fit, Standardizer};
use super::{check_two_classes, ClassifierConfig, ClassifierKind, ClassifyError, Result};

type ObjectiveFn = fn(&DMatrix<f64>, &[u8], &[f64], f64, f64) -> f64;
type GradientFn = fn(&DMatrix<f64>, &[u8], &[f64], f64, f64) -> (Vec<f64>, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ClassifierKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Applied to inputs before the inner product; `None` scores raw inputs.
    pub standardizer: Option<Standardizer>,
}

impl LinearModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        let dot = match &self.standardizer {
            Some(s) => dot(&self.weights, &s.transform_row(x)),
            None => dot(&self.weights, x),
        };
        dot + self.bias
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let z = self.margin(x);
        match self.kind {
            ClassifierKind::LogisticRegression => sigmoid(z),
            _ => z,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn margins(x: &DMatrix<f64>, w: &[f64], b: f64) -> DVector<f64> {
    let mut z = x * DVector::from_column_slice(w);
    z.add_scalar_mut(b);
    z
}

fn ridge(w: &[f64], lambda: f64) -> f64 {
    0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Mean log-loss plus `(λ/2)‖w‖²`; the bias is not penalized.
pub fn logistic_objective(x: &DMatrix<f64>, y: &[u8], w: &[f64], b: f64, lambda: f64) -> f64 {
    let z = margins(x, w, b);
    let n = y.len() as f64;
    let data: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| softplus(zi) - f64::from(yi) * zi)
        .sum();
    data / n + ridge(w, lambda)
}

/// Gradient of [`logistic_objective`] with respect to `(w, b)`.
pub fn logistic_gradient(x: &DMatrix<f64>, y: &[u8], w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let z = margins(x, w, b);
    let n = y.len() as f64;
    let resid = DVector::from_iterator(y.len(), z.iter().zip(y).map(|(&zi, &yi)| sigmoid(zi) - f64::from(yi)));
    let gw = x.transpose() * &resid / n;
    let grad_w = gw.iter().zip(w).map(|(g, wi)| g + lambda * wi).collect();
    (grad_w, resid.sum() / n)
}

fn signed(y: u8) -> f64 {
    if y == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Mean hinge loss `max(0, 1 − y·f(x))` with labels mapped to ±1, plus
/// `(λ/2)‖w‖²`.
pub fn hinge_objective(x: &DMatrix<f64>, y: &[u8], w: &[f64], b: f64, lambda: f64) -> f64 {
    let z = margins(x, w, b);
    let n = y.len() as f64;
    let data: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| (1.0 - signed(yi) * zi).max(0.0))
        .sum();
    data / n + ridge(w, lambda)
}

/// Subgradient of [`hinge_objective`]; points exactly on the kink
/// contribute 0.
pub fn hinge_gradient(x: &DMatrix<f64>, y: &[u8], w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let z = margins(x, w, b);
    let n = y.len() as f64;
    let coef = DVector::from_iterator(
        y.len(),
        z.iter().zip(y).map(|(&zi, &yi)| {
            let s = signed(yi);
            if s * zi < 1.0 {
                -s
            } else {
                0.0
            }
        }),
    );
    let gw = x.transpose() * &coef / n;
    let grad_w = gw.iter().zip(w).map(|(g, wi)| g + lambda * wi).collect();
    (grad_w, coef.sum() / n)
}

/// Full-batch descent from zero; returns the model and the objective
/// before each step plus after the last one.
pub(crate) fn train(x: &DMatrix<f64>, y: &[u8], cfg: &ClassifierConfig) -> Result<(LinearModel, Vec<f64>)> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(ClassifyError::LengthMismatch(x.nrows(), y.len()));
    }
    check_two_classes(y)?;
    let (objective, gradient): (
        ObjectiveFn,
        GradientFn,
    ) = match cfg.kind {
        ClassifierKind::LogisticRegression => (logistic_objective, logistic_gradient),
        ClassifierKind::LinearSvm => (hinge_objective, hinge_gradient),
        ClassifierKind::RandomForest => {
            return Err(ClassifyError::InvalidConfig("random_forest is not a linear model".into()))
        }
    };
    let standardizer = standardize_fit(x);
    let xs = standardizer.transform(x);
    let mut w = vec![0.0; x.ncols()];
    let mut b = 0.0;
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..=cfg.epochs {
        let loss = objective(&xs, y, &w, b, cfg.l2_lambda);
        if !loss.is_finite() {
            return Err(ClassifyError::DivergedLoss { epoch });
        }
        trace.push(loss);
        if epoch == cfg.epochs {
            break;
        }
        let (gw, gb) = gradient(&xs, y, &w, b, cfg.l2_lambda);
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= cfg.learning_rate * gi;
        }
        b -= cfg.learning_rate * gb;
        if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(ClassifyError::DivergedLoss { epoch: epoch + 1 });
        }
    }
    Ok((
        LinearModel {
            kind: cfg.kind,
            weights: w,
            bias: b,
            standardizer: Some(standardizer),
        },
        trace,
    ))
}

/// Objective value per epoch for a linear model config.
pub fn linear_loss_trace(x: &DMatrix<f64>, y: &[u8], cfg: &ClassifierConfig) -> Result<Vec<f64>> {
    train(x, y, cfg).map(|(_, trace)| trace)
}
