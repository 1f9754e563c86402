//! Per-subject feature vectors and the labelled dataset they form.
//!
//! A feature vector holds `5R + 2` values in metric-major order: all R
//! clustering values, then degree centrality, closeness, betweenness and
//! average neighbor degree, followed by `local_efficiency` and
//! `global_efficiency`. Per-region names are `<metric>__<region_label>`.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::graphmetrics::{GraphMetricPair, NodeMetricTable};
use crate::ingest::DatasetManifest;

pub const NODE_METRICS: [&str; 5] = [
    "clustering",
    "degree_centrality",
    "closeness",
    "betweenness",
    "avg_neighbor_degree",
];

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("metric tables disagree on region count: {0}")]
    LengthMismatch(String),
    #[error("no feature vector for subject {0:?}")]
    MissingSubjectVector(String),
    #[error("subject {0:?} has feature names that differ from the first subject")]
    FeatureNameMismatch(String),
    #[error("invalid feature vector: {0}")]
    InvalidVector(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, FeatureError>;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(FeatureError::InvalidVector(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::InvalidVector(format!("{} is not finite", names[i])));
        }
        check_unique(&names).map_err(FeatureError::InvalidVector)?;
        Ok(Self { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

fn check_unique(names: &[String]) -> std::result::Result<(), String> {
    let mut seen = HashSet::with_capacity(names.len());
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(format!("duplicate feature name {n:?}"));
        }
    }
    Ok(())
}

/// Feature names for the given region order.
pub fn feature_names(region_labels: &[String]) -> Vec<String> {
    NODE_METRICS
        .iter()
        .flat_map(|m| region_labels.iter().map(move |r| format!("{m}__{r}")))
        .chain(["local_efficiency".to_string(), "global_efficiency".to_string()])
        .collect()
}

pub fn build_feature_vector(node: &NodeMetricTable, pair: &GraphMetricPair) -> Result<FeatureVector> {
    let r = node.n_regions();
    for (name, col) in node.columns() {
        if col.len() != r {
            return Err(FeatureError::LengthMismatch(format!(
                "{name} has {} entries for {r} regions",
                col.len()
            )));
        }
    }
    let values = node
        .columns()
        .iter()
        .flat_map(|(_, col)| col.iter().copied())
        .chain([pair.local_efficiency, pair.global_efficiency])
        .collect();
    FeatureVector::new(feature_names(&node.region_labels), values)
}

/// Subjects × features matrix with group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    subject_ids: Vec<String>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    matrix: DMatrix<f64>,
}

impl LabeledDataset {
    /// Checks shapes, label values, finiteness and name uniqueness. Class
    /// populations are checked where they matter (cross-validation).
    pub fn new(
        subject_ids: Vec<String>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        matrix: DMatrix<f64>,
    ) -> Result<Self> {
        let bad = FeatureError::InvalidDataset;
        if subject_ids.is_empty() {
            return Err(bad("no subjects".into()));
        }
        if labels.len() != subject_ids.len() || matrix.nrows() != subject_ids.len() {
            return Err(bad(format!(
                "{} subjects, {} labels, {} rows",
                subject_ids.len(),
                labels.len(),
                matrix.nrows()
            )));
        }
        if matrix.ncols() != feature_names.len() {
            return Err(bad(format!("{} columns for {} names", matrix.ncols(), feature_names.len())));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(bad(format!("label {l} is not 0 or 1")));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite feature value".into()));
        }
        check_unique(&feature_names).map_err(bad)?;
        check_unique(&subject_ids).map_err(|m| bad(m.replace("feature name", "subject id")))?;
        Ok(Self {
            subject_ids,
            labels,
            feature_names,
            matrix,
        })
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_subjects(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Copy with row `row` replaced by `values`.
    pub fn with_row(&self, row: usize, values: &[f64]) -> Result<Self> {
        if values.len() != self.n_features() || row >= self.n_subjects() {
            return Err(FeatureError::InvalidDataset(format!(
                "row {row} with {} values does not fit {}x{}",
                values.len(),
                self.n_subjects(),
                self.n_features()
            )));
        }
        let mut matrix = self.matrix.clone();
        for (j, &v) in values.iter().enumerate() {
            matrix[(row, j)] = v;
        }
        Self::new(self.subject_ids.clone(), self.labels.clone(), self.feature_names.clone(), matrix)
    }

    /// CSV with header `subject_id,label,<feature names>`. Values use the
    /// shortest round-trip representation, so output is deterministic.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = ["subject_id".to_string(), "label".to_string()]
            .into_iter()
            .chain(self.feature_names.iter().cloned());
        w.write_record(header).expect("writing to memory");
        for (i, id) in self.subject_ids.iter().enumerate() {
            let values = self.matrix.row(i);
            let row = [id.clone(), self.labels[i].to_string()]
                .into_iter()
                .chain(values.iter().map(|v| v.to_string()));
            w.write_record(row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let bad = FeatureError::InvalidDataset;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.len() < 3 || &header[0] != "subject_id" || &header[1] != "label" {
            return Err(bad("header must start with subject_id,label and name at least one feature".into()));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            ids.push(rec[0].to_string());
            labels.push(match &rec[1] {
                "0" => 0,
                "1" => 1,
                other => return Err(bad(format!("label {other:?} is not 0 or 1"))),
            });
            for cell in rec.iter().skip(2) {
                values.push(cell.parse::<f64>().map_err(|_| bad(format!("bad number {cell:?}")))?);
            }
        }
        let n = ids.len();
        Self::new(ids, labels, names.clone(), DMatrix::from_row_slice(n, names.len(), &values))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_str(&text)
    }
}

/// Stacks subject vectors in manifest order, labelled from the manifest.
pub fn assemble_dataset(
    manifest: &DatasetManifest,
    vectors: &HashMap<String, FeatureVector>,
) -> Result<LabeledDataset> {
    let entries = manifest.entries();
    let first = entries
        .first()
        .and_then(|e| vectors.get(&e.subject_id))
        .ok_or_else(|| {
            FeatureError::MissingSubjectVector(entries.first().map(|e| e.subject_id.clone()).unwrap_or_default())
        })?;
    let names = first.names().to_vec();
    let p = names.len();
    let mut values = Vec::with_capacity(entries.len() * p);
    for e in entries {
        let v = vectors
            .get(&e.subject_id)
            .ok_or_else(|| FeatureError::MissingSubjectVector(e.subject_id.clone()))?;
        if v.names() != names.as_slice() {
            return Err(FeatureError::FeatureNameMismatch(e.subject_id.clone()));
        }
        values.extend_from_slice(v.values());
    }
    LabeledDataset::new(
        entries.iter().map(|e| e.subject_id.clone()).collect(),
        entries.iter().map(|e| e.label).collect(),
        names,
        DMatrix::from_row_slice(entries.len(), p, &values),
    )
}
