//! Temporal cleaning of ROI series: polynomial detrending, hard spectral
//! band-pass, and least-squares nuisance regression with optional
//! global-signal regression.
//!
//! [`run_denoise`] always applies the enabled stages in the order
//! detrend → band-pass → nuisance regression. The global signal is taken
//! after the first two stages so the regressor lives in the same filtered
//! space as the data it is regressed out of.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::ingest::{IngestError, RoiTimeSeries};
use crate::kv;
use crate::linalg::{inverse_condition, ols_residuals};

/// Minimum accepted ratio of smallest to largest singular value of the
/// intercept-augmented nuisance design.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum DenoiseError {
    #[error("detrend order {order} needs more than {} timepoints, found {timepoints}", order + 1)]
    OrderTooHigh { order: usize, timepoints: usize },
    #[error("band [{low}, {high}] Hz is not within [0, {nyquist}] Hz with low < high")]
    BandOutOfRange { low: f64, high: f64, nyquist: f64 },
    #[error("nuisance design is rank deficient (singular value ratio {ratio:e})")]
    RankDeficientDesign { ratio: f64 },
    #[error("nuisance regressors have {found} rows, series has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid nuisance set: {0}")]
    InvalidNuisance(String),
    #[error("invalid denoise config: {0}")]
    Config(String),
    #[error(transparent)]
    Series(#[from] IngestError),
}

type Result<T> = std::result::Result<T, DenoiseError>;

/// Named nuisance regressors, one column per regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceSet {
    names: Vec<String>,
    regressors: DMatrix<f64>,
}

impl NuisanceSet {
    pub fn new(names: Vec<String>, regressors: DMatrix<f64>) -> Result<Self> {
        if names.len() != regressors.ncols() {
            return Err(DenoiseError::InvalidNuisance(format!(
                "{} names for {} columns",
                names.len(),
                regressors.ncols()
            )));
        }
        for (k, col) in regressors.column_iter().enumerate() {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(DenoiseError::InvalidNuisance(format!(
                    "regressor {:?} has non-finite values",
                    names[k]
                )));
            }
            if col.iter().all(|&v| v == 0.0) {
                return Err(DenoiseError::InvalidNuisance(format!(
                    "regressor {:?} is all zeros",
                    names[k]
                )));
            }
        }
        Ok(Self { names, regressors })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn regressors(&self) -> &DMatrix<f64> {
        &self.regressors
    }

    pub fn n_timepoints(&self) -> usize {
        self.regressors.nrows()
    }

    /// Appends one more named column.
    pub fn with_column(&self, name: impl Into<String>, column: &DVector<f64>) -> Result<Self> {
        if column.len() != self.n_timepoints() {
            return Err(DenoiseError::LengthMismatch {
                expected: self.n_timepoints(),
                found: column.len(),
            });
        }
        let k = self.regressors.ncols();
        let regressors = self.regressors.clone().insert_column(k, 0.0);
        let mut regressors = regressors;
        regressors.set_column(k, column);
        let mut names = self.names.clone();
        names.push(name.into());
        Self::new(names, regressors)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenoiseConfig {
    /// Polynomial order removed per column; `None` skips detrending.
    pub detrend_order: Option<usize>,
    /// Pass band `(low, high)` in Hz; `None` skips filtering.
    pub bandpass_hz: Option<(f64, f64)>,
    pub regress_global_signal: bool,
    pub extra_nuisance: Option<NuisanceSet>,
}

impl DenoiseConfig {
    /// Reads `detrend_order`, `bandpass` and `global_signal` from a parsed
    /// key=value map; other keys are ignored. `none` disables a stage.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_map(map)?;
        Ok(cfg)
    }

    /// Overrides fields present in `map`, leaving the rest untouched.
    pub fn apply_map(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        if let Some(v) = map.get("detrend_order") {
            self.detrend_order = if v.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(v.parse().map_err(|_| {
                    DenoiseError::Config(format!("detrend_order must be a non-negative integer or none, got {v:?}"))
                })?)
            };
        }
        if let Some(v) = map.get("bandpass") {
            self.bandpass_hz = if v.eq_ignore_ascii_case("none") {
                None
            } else {
                match kv::parse_reals(v).as_deref() {
                    Some(&[low, high]) => {
                        if !(low >= 0.0 && high > low && high.is_finite()) {
                            return Err(DenoiseError::Config(format!(
                                "bandpass needs 0 <= low < high, got {v:?}"
                            )));
                        }
                        Some((low, high))
                    }
                    _ => {
                        return Err(DenoiseError::Config(format!(
                            "bandpass must be `low,high` in Hz or none, got {v:?}"
                        )))
                    }
                }
            };
        }
        if let Some(v) = map.get("global_signal") {
            self.regress_global_signal = kv::parse_bool(v)
                .ok_or_else(|| DenoiseError::Config(format!("global_signal must be true/false, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let map = kv::parse(text).map_err(|e| DenoiseError::Config(e.to_string()))?;
        Self::from_map(&map)
    }

    /// Canonical key=value form. `extra_nuisance` is per-subject data and
    /// is not part of the text form.
    pub fn to_kv_text(&self) -> String {
        let detrend = self
            .detrend_order
            .map_or_else(|| "none".to_string(), |k| k.to_string());
        let band = self
            .bandpass_hz
            .map_or_else(|| "none".to_string(), |(l, h)| format!("{l},{h}"));
        format!(
            "detrend_order={detrend}\nbandpass={band}\nglobal_signal={}\n",
            self.regress_global_signal
        )
    }

    pub fn is_identity(&self) -> bool {
        self.detrend_order.is_none()
            && self.bandpass_hz.is_none()
            && !self.regress_global_signal
            && self.extra_nuisance.is_none()
    }

    /// Checks the config against a series without running it.
    pub fn validate_for(&self, ts: &RoiTimeSeries) -> Result<()> {
        if let Some(order) = self.detrend_order {
            check_order(order, ts.n_timepoints())?;
        }
        if let Some((low, high)) = self.bandpass_hz {
            check_band(low, high, ts.tr_seconds())?;
        }
        if let Some(n) = &self.extra_nuisance {
            if n.n_timepoints() != ts.n_timepoints() {
                return Err(DenoiseError::LengthMismatch {
                    expected: ts.n_timepoints(),
                    found: n.n_timepoints(),
                });
            }
        }
        Ok(())
    }
}

fn check_order(order: usize, timepoints: usize) -> Result<()> {
    if timepoints <= order + 1 {
        Err(DenoiseError::OrderTooHigh { order, timepoints })
    } else {
        Ok(())
    }
}

fn check_band(low: f64, high: f64, tr_seconds: f64) -> Result<()> {
    let nyquist = 1.0 / (2.0 * tr_seconds);
    let ok = low >= 0.0 && low < high && high <= nyquist * (1.0 + 1e-12);
    if ok {
        Ok(())
    } else {
        Err(DenoiseError::BandOutOfRange { low, high, nyquist })
    }
}

/// Legendre polynomials of degree `0..=order` evaluated on the time index
/// mapped to `[-1, 1]`. Spans the same space as raw powers of the index.
pub fn polynomial_basis(timepoints: usize, order: usize) -> DMatrix<f64> {
    let mut basis = DMatrix::zeros(timepoints, order + 1);
    let span = (timepoints.max(2) - 1) as f64;
    for t in 0..timepoints {
        let x = 2.0 * t as f64 / span - 1.0;
        let (mut prev, mut cur) = (1.0, x);
        basis[(t, 0)] = 1.0;
        if order >= 1 {
            basis[(t, 1)] = x;
        }
        for n in 1..order {
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
            prev = cur;
            cur = next;
            basis[(t, n + 1)] = next;
        }
    }
    basis
}

/// Removes a least-squares polynomial trend of the given order from each
/// region.
pub fn detrend(ts: &RoiTimeSeries, order: usize) -> Result<RoiTimeSeries> {
    check_order(order, ts.n_timepoints())?;
    let basis = polynomial_basis(ts.n_timepoints(), order);
    Ok(ts.with_data(ols_residuals(&basis, ts.data()))?)
}

/// Frequency in Hz represented by DFT bin `k` of a length-`n` transform.
fn bin_frequency(k: usize, n: usize, tr_seconds: f64) -> f64 {
    k.min(n - k) as f64 / (n as f64 * tr_seconds)
}

/// Hard spectral band-pass: bins with frequency outside `[low_hz, high_hz]`
/// are zeroed. The DC bin is removed whenever `low_hz > 0`.
pub fn bandpass(ts: &RoiTimeSeries, low_hz: f64, high_hz: f64) -> Result<RoiTimeSeries> {
    check_band(low_hz, high_hz, ts.tr_seconds())?;
    let n = ts.n_timepoints();
    let tr = ts.tr_seconds();
    let keep: Vec<bool> = (0..n)
        .map(|k| {
            if k == 0 {
                return low_hz <= 0.0;
            }
            let f = bin_frequency(k, n, tr);
            f >= low_hz && f <= high_hz
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut out = ts.data().clone();
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for mut col in out.column_iter_mut() {
        for (b, &v) in buf.iter_mut().zip(col.iter()) {
            *b = Complex::new(v, 0.0);
        }
        forward.process(&mut buf);
        for (b, &k) in buf.iter_mut().zip(&keep) {
            if !k {
                *b = Complex::new(0.0, 0.0);
            }
        }
        inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (v, b) in col.iter_mut().zip(&buf) {
            *v = b.re * scale;
        }
    }
    Ok(ts.with_data(out)?)
}

/// Mean across regions at every timepoint.
pub fn global_signal(ts: &RoiTimeSeries) -> DVector<f64> {
    let r = ts.n_regions() as f64;
    DVector::from_iterator(
        ts.n_timepoints(),
        ts.data().row_iter().map(|row| row.sum() / r),
    )
}

/// Replaces each region by its OLS residual on `[1 | regressors]`.
pub fn nuisance_regress(ts: &RoiTimeSeries, nuisance: &NuisanceSet) -> Result<RoiTimeSeries> {
    let t = ts.n_timepoints();
    if nuisance.n_timepoints() != t {
        return Err(DenoiseError::LengthMismatch {
            expected: t,
            found: nuisance.n_timepoints(),
        });
    }
    let k = nuisance.regressors.ncols();
    if k + 1 > t {
        return Err(DenoiseError::RankDeficientDesign { ratio: 0.0 });
    }
    let design = nuisance.regressors.clone().insert_column(0, 1.0);
    let ratio = inverse_condition(&design);
    // negated so NaN also fails
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(ratio > RANK_TOLERANCE) {
        return Err(DenoiseError::RankDeficientDesign { ratio });
    }
    Ok(ts.with_data(ols_residuals(&design, ts.data()))?)
}

/// Runs the enabled stages in the fixed order detrend → band-pass →
/// nuisance regression.
pub fn run_denoise(ts: &RoiTimeSeries, cfg: &DenoiseConfig) -> Result<RoiTimeSeries> {
    cfg.validate_for(ts)?;
    let mut out = ts.clone();
    if let Some(order) = cfg.detrend_order {
        out = detrend(&out, order)?;
    }
    if let Some((low, high)) = cfg.bandpass_hz {
        out = bandpass(&out, low, high)?;
    }
    let nuisance = match (&cfg.extra_nuisance, cfg.regress_global_signal) {
        (Some(extra), true) => Some(extra.with_column("global_signal", &global_signal(&out))?),
        (Some(extra), false) => Some(extra.clone()),
        (None, true) => {
            let gs = global_signal(&out);
            let t = gs.len();
            Some(NuisanceSet::new(
                vec!["global_signal".to_string()],
                DMatrix::from_column_slice(t, 1, gs.as_slice()),
            )?)
        }
        (None, false) => None,
    };
    if let Some(n) = nuisance {
        out = nuisance_regress(&out, &n)?;
    }
    Ok(out)
}
