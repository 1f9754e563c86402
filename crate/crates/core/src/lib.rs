//! Functional-connectivity graph analytics for ROI time series.
//!
//! The crate turns per-subject region-of-interest BOLD series into
//! thresholded correlation graphs, extracts five per-region graph metrics
//! plus local and global efficiency, and evaluates two-group classifiers
//! under leave-one-out cross-validation. A synthetic cohort generator with
//! planted connectivity differences and thermal, drift, motion and
//! physiological noise makes the whole chain testable without clinical data.
//!
//! Stage order is fixed:
//!
//! ```text
//! ingest -> denoise -> connectivity -> graphmetrics -> features -> classify
//! ```
//!
//! See `examples/` for one runnable walkthrough per stage.

pub mod classify;
pub mod cli;
pub mod connectivity;
pub mod denoise;
pub mod features;
pub mod graphmetrics;
pub mod ingest;
pub mod pipeline;
pub mod simulate;

mod kv;
mod linalg;

pub use classify::{
    loocv, predict_score, roc_points, tpr_at_fpr, ClassifierConfig, ClassifierKind, CvReport,
    TrainedModel,
};
pub use connectivity::{
    density_threshold, pearson_matrix, threshold_graph, BinaryGraph, ConnectivityMatrix,
};
pub use denoise::{run_denoise, DenoiseConfig, NuisanceSet};
pub use features::{assemble_dataset, build_feature_vector, FeatureVector, LabeledDataset};
pub use graphmetrics::{graph_metrics, node_metrics, GraphMetricPair, NodeMetricTable};
pub use ingest::{
    check_cohort, load_manifest, load_time_series, DatasetManifest, IngestError, RoiTimeSeries,
};
pub use pipeline::{PipelineConfig, ThresholdRule};
pub use simulate::{generate_cohort, generate_subject, SimulationSpec};

/// Crate-wide error, wrapping the per-stage error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Denoise(#[from] denoise::DenoiseError),
    #[error(transparent)]
    Connectivity(#[from] connectivity::ConnectivityError),
    #[error(transparent)]
    Features(#[from] features::FeatureError),
    #[error(transparent)]
    Classify(#[from] classify::ClassifyError),
    #[error(transparent)]
    Simulate(#[from] simulate::SimulateError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
