//! End-to-end wiring: per-subject feature extraction, report documents and
//! multi-arm comparison tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{loocv_with_targets, ClassifierConfig, CvReport, DEFAULT_FPR_TARGETS};
use crate::connectivity::{density_threshold, pearson_matrix, threshold_graph, BinaryGraph};
use crate::denoise::{run_denoise, DenoiseConfig};
use crate::features::{build_feature_vector, FeatureVector, LabeledDataset};
use crate::graphmetrics::{graph_metrics, node_metrics};
use crate::ingest::{DatasetManifest, RoiTimeSeries};
use crate::kv;

/// Threshold used when a config does not set one. Arbitrary; choose a value
/// for your data or switch to a density rule.
pub const DEFAULT_TAU: f64 = 0.3;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error("subject {subject_id}: {source}")]
    Subject {
        subject_id: String,
        #[source]
        source: Box<crate::Error>,
    },
    #[error("{}: malformed report: {reason}", path.display())]
    MalformedReport { path: PathBuf, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// Keep edges with correlation strictly above `tau`.
    Tau(f64),
    /// Keep the strongest edges until this fraction of pairs is reached.
    Density(f64),
}

impl ThresholdRule {
    pub fn apply(&self, cm: &crate::ConnectivityMatrix) -> crate::Result<BinaryGraph> {
        Ok(match *self {
            ThresholdRule::Tau(t) => threshold_graph(cm, t)?,
            ThresholdRule::Density(d) => density_threshold(cm, d)?,
        })
    }
}

impl std::fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdRule::Tau(t) => write!(f, "tau:{t}"),
            ThresholdRule::Density(d) => write!(f, "density:{d}"),
        }
    }
}

impl std::str::FromStr for ThresholdRule {
    type Err = PipelineError;

    /// `tau:0.3`, `density:0.1`, or a bare number meaning tau.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || PipelineError::Config(format!("threshold must be `tau:<x>` or `density:<x>`, got {s:?}"));
        let (mode, value) = s.split_once(':').unwrap_or(("tau", s));
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match mode.trim() {
            "tau" if value > -1.0 && value < 1.0 => Ok(ThresholdRule::Tau(value)),
            "density" if value > 0.0 && value <= 1.0 => Ok(ThresholdRule::Density(value)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub denoise: DenoiseConfig,
    pub threshold: ThresholdRule,
    pub classifier: ClassifierConfig,
    pub fpr_targets: Vec<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            denoise: DenoiseConfig::default(),
            threshold: ThresholdRule::Tau(DEFAULT_TAU),
            classifier: ClassifierConfig::default(),
            fpr_targets: DEFAULT_FPR_TARGETS.to_vec(),
        }
    }
}

const DENOISE_KEYS: [&str; 3] = ["detrend_order", "bandpass", "global_signal"];
const CLASSIFIER_KEYS: [&str; 8] = [
    "classifier",
    "l2_lambda",
    "epochs",
    "learning_rate",
    "trees",
    "max_depth",
    "features_per_split",
    "seed",
];

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.classifier
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.fpr_targets.is_empty() {
            return Err(PipelineError::Config("fpr_targets must not be empty".into()));
        }
        if self.fpr_targets.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(PipelineError::Config("fpr_targets must lie in [0, 1]".into()));
        }
        if self.fpr_targets.windows(2).any(|w| w[0] > w[1]) {
            return Err(PipelineError::Config("fpr_targets must be sorted ascending".into()));
        }
        Ok(())
    }

    /// Overrides fields present in `map`. Unknown keys are rejected.
    pub fn apply_map(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        if let Some(k) = map.keys().find(|k| {
            !DENOISE_KEYS.contains(&k.as_str())
                && !CLASSIFIER_KEYS.contains(&k.as_str())
                && k.as_str() != "threshold"
                && k.as_str() != "fpr_targets"
        }) {
            return Err(PipelineError::Config(format!("unknown key {k:?}")));
        }
        self.denoise
            .apply_map(map)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.classifier
            .apply_map(map)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Some(v) = map.get("threshold") {
            self.threshold = v.parse()?;
        }
        if let Some(v) = map.get("fpr_targets") {
            self.fpr_targets = kv::parse_reals(v)
                .ok_or_else(|| PipelineError::Config(format!("fpr_targets must be comma-separated reals, got {v:?}")))?;
        }
        self.validate()
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_map(&parse_kv(text)?)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_kv_text(&text)
    }

    /// Canonical text form; also the input of [`config_hash`].
    pub fn to_kv_text(&self) -> String {
        let targets: Vec<String> = self.fpr_targets.iter().map(f64::to_string).collect();
        format!(
            "{}threshold={}\n{}fpr_targets={}\n",
            self.denoise.to_kv_text(),
            self.threshold,
            self.classifier.to_kv_text(),
            targets.join(",")
        )
    }
}

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    kv::parse(text).map_err(|e| PipelineError::Config(e.to_string()))
}

/// Hex SHA-256 of `text`.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Reproduction record attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl RunMeta {
    pub fn new(command: &str, config_text: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config_hash: config_hash(config_text),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Features of one subject plus the density of its thresholded graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFeatures {
    pub features: FeatureVector,
    pub density: f64,
}

/// denoise → Pearson → threshold → graph metrics → feature vector.
pub fn extract_subject(ts: &RoiTimeSeries, cfg: &PipelineConfig) -> crate::Result<SubjectFeatures> {
    let clean = run_denoise(ts, &cfg.denoise)?;
    let cm = pearson_matrix(&clean)?;
    let graph = cfg.threshold.apply(&cm)?;
    let features = build_feature_vector(&node_metrics(&graph), &graph_metrics(&graph))?;
    Ok(SubjectFeatures {
        features,
        density: graph.density(),
    })
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub dataset: LabeledDataset,
    /// `(subject_id, density)` for every extracted subject, manifest order.
    pub densities: Vec<(String, f64)>,
    /// `(subject_id, message)` for subjects skipped under keep-going.
    pub failures: Vec<(String, String)>,
}

/// Runs [`extract_subject`] over a manifest in parallel. Without
/// `keep_going` the first failing subject (manifest order) is returned as
/// an error; with it, failing subjects are left out of the dataset.
pub fn extract_dataset(manifest: &DatasetManifest, cfg: &PipelineConfig, keep_going: bool) -> Result<Extraction> {
    let results: Vec<crate::Result<SubjectFeatures>> = manifest
        .entries()
        .par_iter()
        .map(|entry| {
            let ts = manifest.load_entry(entry)?;
            extract_subject(&ts, cfg)
        })
        .collect();

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut densities = Vec::new();
    let mut failures = Vec::new();
    let mut names: Option<Vec<String>> = None;
    for (entry, result) in manifest.entries().iter().zip(results) {
        match result {
            Ok(sf) => {
                log::info!("{}: graph density {:.4}", entry.subject_id, sf.density);
                if names.is_none() {
                    names = Some(sf.features.names().to_vec());
                }
                ids.push(entry.subject_id.clone());
                labels.push(entry.label);
                rows.push(sf.features.values().to_vec());
                densities.push((entry.subject_id.clone(), sf.density));
            }
            Err(e) if keep_going => {
                log::warn!("{}: skipped: {e}", entry.subject_id);
                failures.push((entry.subject_id.clone(), e.to_string()));
            }
            Err(e) => {
                return Err(PipelineError::Subject {
                    subject_id: entry.subject_id.clone(),
                    source: Box::new(e),
                })
            }
        }
    }
    let names = names.ok_or_else(|| PipelineError::Config("no subject could be extracted".into()))?;
    let p = names.len();
    let matrix = nalgebra::DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let dataset = LabeledDataset::new(ids, labels, names, matrix).map_err(|e| PipelineError::Subject {
        subject_id: "<dataset>".into(),
        source: Box::new(e.into()),
    })?;
    Ok(Extraction {
        dataset,
        densities,
        failures,
    })
}

/// CvReport JSON document with the effective classifier config and run
/// metadata alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: CvReport,
    pub classifier: ClassifierConfig,
    pub pipeline_config: String,
    pub run_meta: RunMeta,
}

impl ReportDocument {
    pub fn new(report: CvReport, cfg: &PipelineConfig) -> Self {
        let text = cfg.to_kv_text();
        Self {
            report,
            classifier: cfg.classifier.clone(),
            run_meta: RunMeta::new("classify", &text, cfg.classifier.rng_seed),
            pipeline_config: text,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// LOOCV with the config's classifier and FPR targets.
pub fn classify_dataset(ds: &LabeledDataset, cfg: &PipelineConfig) -> crate::Result<ReportDocument> {
    let report = loocv_with_targets(ds, &cfg.classifier, &cfg.fpr_targets)?;
    Ok(ReportDocument::new(report, cfg))
}

/// Summary fields of a report file used by [`comparison_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub name: String,
    pub accuracy: f64,
    pub accuracy_dispersion: f64,
    pub tpr_at_fpr: Vec<(f64, f64)>,
}

/// Reads the fields needed for comparison from report JSON. `name` is the
/// column heading.
pub fn parse_report_summary(text: &str, name: &str, path: &Path) -> Result<ReportSummary> {
    let malformed = |reason: String| PipelineError::MalformedReport {
        path: path.to_path_buf(),
        reason,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let number = |key: &str| {
        value
            .get(key)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| malformed(format!("missing numeric field `{key}`")))
    };
    let accuracy = number("accuracy")?;
    let accuracy_dispersion = number("accuracy_dispersion")?;
    let table = value
        .get("tpr_at_fpr")
        .and_then(serde_json::Value::as_object)
        .ok_or_else(|| malformed("missing field `tpr_at_fpr`".into()))?;
    let mut tpr_at_fpr = Vec::with_capacity(table.len());
    for (k, v) in table {
        let fpr: f64 = k
            .parse()
            .map_err(|_| malformed(format!("tpr_at_fpr key {k:?} is not a number")))?;
        let tpr = v
            .as_f64()
            .ok_or_else(|| malformed(format!("tpr_at_fpr[{k}] is not a number")))?;
        tpr_at_fpr.push((fpr, tpr));
    }
    tpr_at_fpr.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ReportSummary {
        name: name.to_string(),
        accuracy,
        accuracy_dispersion,
        tpr_at_fpr,
    })
}

pub fn load_report_summary(path: impl AsRef<Path>) -> Result<ReportSummary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    parse_report_summary(&text, &name, path)
}

/// Side-by-side table: one column per report, one row per FPR target
/// (union over reports, ascending), then an accuracy row.
pub fn comparison_table(reports: &[ReportSummary]) -> String {
    let mut fprs: Vec<f64> = reports
        .iter()
        .flat_map(|r| r.tpr_at_fpr.iter().map(|(f, _)| *f))
        .collect();
    fprs.sort_by(f64::total_cmp);
    fprs.dedup();

    let width = reports
        .iter()
        .map(|r| r.name.chars().count())
        .max()
        .unwrap_or(0)
        .max(11);
    let mut out = format!("{:<8}", "FPR");
    for r in reports {
        out.push_str(&format!(" {:>width$}", r.name));
    }
    out.push('\n');
    for f in &fprs {
        out.push_str(&format!("{:<8}", f));
        for r in reports {
            let cell = r
                .tpr_at_fpr
                .iter()
                .find(|(g, _)| g == f)
                .map_or_else(|| "-".to_string(), |(_, t)| format!("{t:.2}"));
            out.push_str(&format!(" {cell:>width$}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("{:<8}", "acc"));
    for r in reports {
        let cell = format!("{:.2} ± {:.2}", r.accuracy, r.accuracy_dispersion);
        out.push_str(&format!(" {cell:>width$}"));
    }
    out.push('\n');
    out
}
