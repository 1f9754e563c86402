//! Subject time-series files and dataset manifests.
//!
//! A time-series file is UTF-8 CSV: one header row of region labels, then
//! one row per volume. Column order is the region order used everywhere
//! downstream, including feature naming, so nothing here ever re-sorts.
//!
//! A manifest lists one subject per line as `subject_id,label,path` with
//! `label` in `{0,1}`. Lines starting with `#` are comments. Directive lines
//! `tr=<seconds>`, `label0=<name>` and `label1=<name>` set the repetition
//! time (default 2.0 s) and the group names.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

pub const DEFAULT_TR_SECONDS: f64 = 2.0;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    RaggedRows {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: not a finite number: {cell:?}")]
    NonNumericCell {
        line: u64,
        column: usize,
        cell: String,
    },
    #[error("duplicate region label {0:?}")]
    DuplicateRegionLabel(String),
    #[error("empty region label in column {0}")]
    EmptyRegionLabel(usize),
    #[error("need at least 2 timepoints, found {0}")]
    TooFewRows(usize),
    #[error("need at least 2 regions, found {0}")]
    TooFewRegions(usize),
    #[error("data has {data} columns but {labels} region labels")]
    ShapeMismatch { data: usize, labels: usize },
    #[error("non-finite sample at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("repetition time must be positive and finite, got {0}")]
    InvalidTr(f64),
    #[error("manifest line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),
    #[error("manifest line {line}: unknown label {label:?} (expected 0 or 1)")]
    UnknownLabel { line: usize, label: String },
    #[error("class {label} has {count} subject(s); at least 2 per class are needed for leave-one-out")]
    ClassUnderpopulated { label: u8, count: usize },
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("subject {subject:?} region labels differ from subject {reference:?}")]
    RegionMismatch { subject: String, reference: String },
    #[error("subject {subject:?} has TR {found} s, expected {expected} s")]
    TrMismatch {
        subject: String,
        expected: f64,
        found: f64,
    },
}

type Result<T> = std::result::Result<T, IngestError>;

/// One subject's T×R matrix of BOLD samples over R labelled regions.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiTimeSeries {
    subject_id: String,
    region_labels: Vec<String>,
    data: DMatrix<f64>,
    tr_seconds: f64,
}

impl RoiTimeSeries {
    pub fn new(
        subject_id: impl Into<String>,
        region_labels: Vec<String>,
        data: DMatrix<f64>,
        tr_seconds: f64,
    ) -> Result<Self> {
        validate_labels(&region_labels)?;
        if data.ncols() != region_labels.len() {
            return Err(IngestError::ShapeMismatch {
                data: data.ncols(),
                labels: region_labels.len(),
            });
        }
        if data.nrows() < 2 {
            return Err(IngestError::TooFewRows(data.nrows()));
        }
        check_finite(&data)?;
        check_tr(tr_seconds)?;
        Ok(Self {
            subject_id: subject_id.into(),
            region_labels,
            data,
            tr_seconds,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn region_labels(&self) -> &[String] {
        &self.region_labels
    }

    /// Rows are timepoints, columns are regions.
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn tr_seconds(&self) -> f64 {
        self.tr_seconds
    }

    pub fn n_timepoints(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_regions(&self) -> usize {
        self.data.ncols()
    }

    pub fn with_subject_id(mut self, subject_id: impl Into<String>) -> Self {
        self.subject_id = subject_id.into();
        self
    }

    pub fn with_tr(mut self, tr_seconds: f64) -> Result<Self> {
        check_tr(tr_seconds)?;
        self.tr_seconds = tr_seconds;
        Ok(self)
    }

    /// Same subject, labels and TR with new sample values of identical shape.
    pub fn with_data(&self, data: DMatrix<f64>) -> Result<Self> {
        if data.shape() != self.data.shape() {
            return Err(IngestError::ShapeMismatch {
                data: data.ncols(),
                labels: self.region_labels.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self {
            subject_id: self.subject_id.clone(),
            region_labels: self.region_labels.clone(),
            data,
            tr_seconds: self.tr_seconds,
        })
    }

    /// Serializes to the time-series CSV format. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.region_labels)
            .expect("writing to memory");
        for row in self.data.row_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
    }
}

fn validate_labels(labels: &[String]) -> Result<()> {
    if labels.len() < 2 {
        return Err(IngestError::TooFewRegions(labels.len()));
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for (j, label) in labels.iter().enumerate() {
        if label.is_empty() {
            return Err(IngestError::EmptyRegionLabel(j));
        }
        if !seen.insert(label.as_str()) {
            return Err(IngestError::DuplicateRegionLabel(label.clone()));
        }
    }
    Ok(())
}

fn check_finite(data: &DMatrix<f64>) -> Result<()> {
    for j in 0..data.ncols() {
        for i in 0..data.nrows() {
            if !data[(i, j)].is_finite() {
                return Err(IngestError::NonFinite { row: i, column: j });
            }
        }
    }
    Ok(())
}

fn check_tr(tr: f64) -> Result<()> {
    if tr.is_finite() && tr > 0.0 {
        Ok(())
    } else {
        Err(IngestError::InvalidTr(tr))
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            IngestError::MissingFile(path.to_path_buf())
        } else {
            IngestError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

/// Loads a time-series CSV. The subject id is the file stem and the TR is
/// [`DEFAULT_TR_SECONDS`]; the manifest loader overrides both.
pub fn load_time_series(path: impl AsRef<Path>) -> Result<RoiTimeSeries> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let subject_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_time_series(&text, subject_id, DEFAULT_TR_SECONDS).map_err(|e| match e {
        IngestError::Csv { message, .. } => IngestError::Csv {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parses time-series CSV text. LF and CRLF line endings are accepted.
pub fn parse_time_series(
    text: &str,
    subject_id: impl Into<String>,
    tr_seconds: f64,
) -> Result<RoiTimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let csv_err = |e: csv::Error| IngestError::Csv {
        path: PathBuf::new(),
        message: e.to_string(),
    };

    let header = match records.next() {
        Some(rec) => rec.map_err(csv_err)?,
        None => return Err(IngestError::TooFewRegions(0)),
    };
    let labels: Vec<String> = header.iter().map(str::to_string).collect();
    validate_labels(&labels)?;
    let n_regions = labels.len();

    let mut values = Vec::new();
    let mut n_rows = 0usize;
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0) == Some("") {
            // trailing blank line
            continue;
        }
        if rec.len() != n_regions {
            return Err(IngestError::RaggedRows {
                line,
                expected: n_regions,
                found: rec.len(),
            });
        }
        for (column, cell) in rec.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(IngestError::NonNumericCell {
                        line,
                        column,
                        cell: cell.to_string(),
                    })
                }
            }
        }
        n_rows += 1;
    }
    if n_rows < 2 {
        return Err(IngestError::TooFewRows(n_rows));
    }
    let data = DMatrix::from_row_slice(n_rows, n_regions, &values);
    RoiTimeSeries::new(subject_id, labels, data, tr_seconds)
}

/// Writes `ts` in the time-series CSV format.
pub fn write_time_series(ts: &RoiTimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, ts.to_csv_string()).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub label: u8,
    pub path: PathBuf,
}

/// Subjects, their group labels and the files holding their series.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    label_names: [String; 2],
    tr_seconds: f64,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>, label_names: [String; 2], tr_seconds: f64) -> Result<Self> {
        check_tr(tr_seconds)?;
        let mut seen = HashSet::new();
        let mut counts = [0usize; 2];
        for (idx, e) in entries.iter().enumerate() {
            if e.label > 1 {
                return Err(IngestError::UnknownLabel {
                    line: idx + 1,
                    label: e.label.to_string(),
                });
            }
            if !seen.insert(e.subject_id.as_str()) {
                return Err(IngestError::DuplicateSubject(e.subject_id.clone()));
            }
            counts[e.label as usize] += 1;
        }
        for (label, &count) in counts.iter().enumerate() {
            if count < 2 {
                return Err(IngestError::ClassUnderpopulated {
                    label: label as u8,
                    count,
                });
            }
        }
        Ok(Self {
            entries,
            label_names,
            tr_seconds,
        })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn label_names(&self) -> &[String; 2] {
        &self.label_names
    }

    pub fn tr_seconds(&self) -> f64 {
        self.tr_seconds
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn label_of(&self, subject_id: &str) -> Option<u8> {
        self.entries
            .iter()
            .find(|e| e.subject_id == subject_id)
            .map(|e| e.label)
    }

    /// Manifest text; paths are written exactly as stored.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("tr={}\n", self.tr_seconds));
        out.push_str(&format!("label0={}\n", self.label_names[0]));
        out.push_str(&format!("label1={}\n", self.label_names[1]));
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.subject_id, e.label, e.path.display()));
        }
        out
    }

    /// Loads every subject's series, applying the manifest TR and ids.
    pub fn load_series(&self) -> Result<Vec<RoiTimeSeries>> {
        self.entries.iter().map(|e| self.load_entry(e)).collect()
    }

    pub fn load_entry(&self, entry: &ManifestEntry) -> Result<RoiTimeSeries> {
        load_time_series(&entry.path)?
            .with_subject_id(entry.subject_id.clone())
            .with_tr(self.tr_seconds)
    }
}

/// Loads a manifest, resolving relative paths against its directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<DatasetManifest> {
    let mut entries = Vec::new();
    let mut label_names = [String::from("group0"), String::from("group1")];
    let mut tr_seconds = DEFAULT_TR_SECONDS;
    let mut seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |message: String| IngestError::MalformedLine {
            line: line_no,
            message,
        };
        if !line.contains(',') {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| malformed(format!("expected `subject_id,label,path`, got {line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "tr" => {
                    tr_seconds = value
                        .parse::<f64>()
                        .map_err(|_| malformed(format!("bad tr value {value:?}")))?;
                    check_tr(tr_seconds)?;
                }
                "label0" => label_names[0] = value.to_string(),
                "label1" => label_names[1] = value.to_string(),
                other => return Err(malformed(format!("unknown directive {other:?}"))),
            }
            continue;
        }
        let parts: Vec<&str> = line.splitn(3, ',').map(str::trim).collect();
        if parts.len() != 3 || parts[0].is_empty() || parts[2].is_empty() {
            return Err(malformed(format!("expected `subject_id,label,path`, got {line:?}")));
        }
        let label = match parts[1] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(IngestError::UnknownLabel {
                    line: line_no,
                    label: other.to_string(),
                })
            }
        };
        if !seen.insert(parts[0].to_string()) {
            return Err(IngestError::DuplicateSubject(parts[0].to_string()));
        }
        let rel = PathBuf::from(parts[2]);
        let path = if rel.is_absolute() { rel } else { base_dir.join(rel) };
        entries.push(ManifestEntry {
            subject_id: parts[0].to_string(),
            label,
            path,
        });
    }
    DatasetManifest::new(entries, label_names, tr_seconds)
}

/// Region count, timepoint range and subject count of a compatible cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CohortSummary {
    pub regions: usize,
    pub min_timepoints: usize,
    pub max_timepoints: usize,
    pub subjects: usize,
}

/// Verifies that every subject shares the first subject's region labels
/// (in order) and TR.
pub fn check_cohort(series: &[RoiTimeSeries]) -> Result<CohortSummary> {
    let first = series.first().ok_or(IngestError::EmptyCohort)?;
    let mut min_t = usize::MAX;
    let mut max_t = 0;
    for ts in series {
        if ts.region_labels != first.region_labels {
            return Err(IngestError::RegionMismatch {
                subject: ts.subject_id.clone(),
                reference: first.subject_id.clone(),
            });
        }
        if ts.tr_seconds != first.tr_seconds {
            return Err(IngestError::TrMismatch {
                subject: ts.subject_id.clone(),
                expected: first.tr_seconds,
                found: ts.tr_seconds,
            });
        }
        min_t = min_t.min(ts.n_timepoints());
        max_t = max_t.max(ts.n_timepoints());
    }
    Ok(CohortSummary {
        regions: first.n_regions(),
        min_timepoints: min_t,
        max_timepoints: max_t,
        subjects: series.len(),
    })
}
