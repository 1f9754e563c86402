use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Floor applied to per-feature standard deviations.
pub const MIN_STD: f64 = 1e-12;

/// Per-feature sample mean and (floored) sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.std[j])
    }
}

/// Fits column statistics on `train` (rows are subjects; needs ≥ 2 rows).
pub fn standardize_fit(train: &DMatrix<f64>) -> Standardizer {
    let n = train.nrows();
    assert!(n >= 2, "standardization needs at least two rows");
    let mut mean = Vec::with_capacity(train.ncols());
    let mut std = Vec::with_capacity(train.ncols());
    for col in train.column_iter() {
        let m = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
        mean.push(m);
        std.push(var.sqrt().max(MIN_STD));
    }
    Standardizer { mean, std }
}
