//! Library-level worked examples, one function per documented case.

use std::collections::HashMap;
use std::path::PathBuf;

use fcgraph::classify::{
    fold_model, gini, loocv_with, train_linear_svm, train_logreg, Classifier, ClassifierKind, DecisionTree, Forest,
    LinearModel, TreeNode, TreeParams, DEFAULT_FPR_TARGETS,
};
use fcgraph::classify::{standardize_fit, ClassifyError, MIN_STD};
use fcgraph::connectivity::{edges_for_density, ConnectivityError};
use fcgraph::denoise::{bandpass, detrend, global_signal, nuisance_regress};
use fcgraph::features::{feature_names, FeatureError};
use fcgraph::graphmetrics::{
    average_neighbor_degree, betweenness_centrality, closeness_centrality, clustering_coefficient,
    degree_centrality, global_efficiency, local_efficiency,
};
use fcgraph::ingest::{parse_time_series, IngestError, ManifestEntry};
use fcgraph::pipeline::{extract_dataset, PipelineConfig, ThresholdRule};
use fcgraph::simulate::{BaseCovariance, SimulationSpec, Simulator};
use fcgraph::{
    assemble_dataset, build_feature_vector, check_cohort, density_threshold, graph_metrics, node_metrics,
    pearson_matrix, predict_score, roc_points, run_denoise, threshold_graph, tpr_at_fpr, BinaryGraph,
    ClassifierConfig, ConnectivityMatrix, DatasetManifest, DenoiseConfig, FeatureVector, LabeledDataset,
    NuisanceSet, RoiTimeSeries, TrainedModel,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{labels, oracle};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn assert_slice(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (g, w) in got.iter().zip(want) {
        assert!(close(*g, *w, tol), "{got:?} vs {want:?}");
    }
}

/// Single-column inputs get a filler second column; every stage checked here
/// acts per column.
fn series(cols: &[Vec<f64>], tr: f64) -> RoiTimeSeries {
    let t = cols[0].len();
    let mut cols = cols.to_vec();
    if cols.len() == 1 {
        cols.push((0..t).map(|i| (i * i) as f64).collect());
    }
    let data = DMatrix::from_fn(t, cols.len(), |i, j| cols[j][i]);
    RoiTimeSeries::new("s", labels(cols.len()), data, tr).unwrap()
}

fn column(ts: &RoiTimeSeries, j: usize) -> Vec<f64> {
    ts.data().column(j).iter().copied().collect()
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn graph(n: usize, edges: &[(usize, usize)]) -> BinaryGraph {
    BinaryGraph::from_edges(labels(n), edges).unwrap()
}

fn k3() -> BinaryGraph {
    graph(3, &[(0, 1), (0, 2), (1, 2)])
}

fn p3() -> BinaryGraph {
    graph(3, &[(0, 1), (1, 2)])
}

fn star() -> BinaryGraph {
    graph(4, &[(0, 1), (0, 2), (0, 3)])
}

fn c4() -> BinaryGraph {
    graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
}

fn k4_minus_edge() -> BinaryGraph {
    // node 0 touches everyone; 2-3 missing
    graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
}

// ingest

pub fn parse_three_rows() {
    let ts = parse_time_series("A,B\n1,2\n2,4\n3,6\n", "s", 2.0).unwrap();
    assert_eq!((ts.n_timepoints(), ts.n_regions()), (3, 2));
    assert_eq!(ts.data(), &DMatrix::from_row_slice(3, 2, &[1., 2., 2., 4., 3., 6.]));
}

pub fn ragged_rows() {
    let err = parse_time_series("A,B\n1,2\n1,2,3\n", "s", 2.0).unwrap_err();
    assert!(matches!(err, IngestError::RaggedRows { .. }), "{err}");
}

pub fn duplicate_region_label() {
    let err = parse_time_series("A,A\n1,2\n3,4\n", "s", 2.0).unwrap_err();
    assert!(matches!(err, IngestError::DuplicateRegionLabel(_)), "{err}");
}

fn entries(spec: &[(&str, u8)]) -> Vec<ManifestEntry> {
    spec.iter()
        .map(|(id, label)| ManifestEntry {
            subject_id: id.to_string(),
            label: *label,
            path: PathBuf::from(format!("{id}.csv")),
        })
        .collect()
}

fn names() -> [String; 2] {
    ["group0".into(), "group1".into()]
}

pub fn manifest_examples() {
    let m = DatasetManifest::new(entries(&[("a", 0), ("b", 0), ("c", 1), ("d", 1)]), names(), 2.0).unwrap();
    assert_eq!(m.len(), 4);
    let err = DatasetManifest::new(entries(&[("a", 0), ("b", 0), ("c", 0), ("d", 1)]), names(), 2.0).unwrap_err();
    assert!(matches!(err, IngestError::ClassUnderpopulated { label: 1, count: 1 }), "{err}");
    let err = DatasetManifest::new(entries(&[("s01", 0), ("s01", 0), ("c", 1), ("d", 1)]), names(), 2.0).unwrap_err();
    assert!(matches!(err, IngestError::DuplicateSubject(_)), "{err}");
}

fn named(id: &str, regions: &[&str], t: usize, tr: f64) -> RoiTimeSeries {
    let data = DMatrix::from_fn(t, regions.len(), |i, j| ((i * 3 + j * 7) % 5) as f64);
    RoiTimeSeries::new(id, regions.iter().map(|s| s.to_string()).collect(), data, tr).unwrap()
}

pub fn cohort_checks() {
    let summary = check_cohort(&[named("a", &["A", "B", "C"], 100, 2.0), named("b", &["A", "B", "C"], 120, 2.0)]).unwrap();
    assert_eq!(
        (summary.regions, summary.min_timepoints, summary.max_timepoints, summary.subjects),
        (3, 100, 120, 2)
    );
    let err = check_cohort(&[named("a", &["A", "B"], 10, 2.0), named("b", &["B", "A"], 10, 2.0)]).unwrap_err();
    assert!(matches!(err, IngestError::RegionMismatch { .. }), "{err}");
    let err = check_cohort(&[named("a", &["A", "B"], 10, 2.0), named("b", &["A", "B"], 10, 2.5)]).unwrap_err();
    assert!(matches!(err, IngestError::TrMismatch { .. }), "{err}");
}

// denoise

pub fn detrend_examples() {
    let ts = series(&[vec![1., 2., 3., 4.]], 2.0);
    assert_slice(&column(&detrend(&ts, 1).unwrap(), 0), &[0.; 4], 1e-12);
    let ts = series(&[vec![5., 5., 5.]], 2.0);
    assert_slice(&column(&detrend(&ts, 0).unwrap(), 0), &[0.; 3], 1e-12);
    let ts = series(&[vec![1., 4., 9., 16., 25.]], 2.0);
    let r = column(&detrend(&ts, 2).unwrap(), 0);
    assert!(r.iter().all(|v| v.abs() < 1e-9), "{r:?}");
}

fn sinusoid(freq: f64, t: usize, tr: f64) -> Vec<f64> {
    (0..t)
        .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 * tr).sin())
        .collect()
}

/// 13/256 Hz is the DFT bin nearest 0.05 Hz at T=128, TR=2 s; 0.05 Hz itself
/// falls between bins.
pub const ALIGNED_FREQ: f64 = 13.0 / 256.0;

pub fn bandpass_examples() {
    let x = sinusoid(ALIGNED_FREQ, 128, 2.0);
    let ts = series(std::slice::from_ref(&x), 2.0);
    let kept = column(&bandpass(&ts, 0.01, 0.1).unwrap(), 0);
    let diff: Vec<f64> = kept.iter().zip(&x).map(|(a, b)| a - b).collect();
    assert!(rms(&diff) < 1e-6, "{}", rms(&diff));
    let killed = column(&bandpass(&ts, 0.1, 0.2).unwrap(), 0);
    assert!(rms(&killed) < 1e-6);
    let flat = series(&[vec![3.0; 128]], 2.0);
    let out = column(&bandpass(&flat, 0.01, 0.1).unwrap(), 0);
    assert!(out.iter().all(|v| v.abs() < 1e-12));
}

pub fn global_signal_examples() {
    let ts = series(&[vec![1., 2.], vec![3., 4.]], 2.0);
    assert_slice(global_signal(&ts).as_slice(), &[2., 3.], 0.0);
    let c = vec![1., 5., 2., 8.];
    let ts = series(&[c.clone(), c.clone(), c.clone()], 2.0);
    assert_slice(global_signal(&ts).as_slice(), &c, 1e-15);
    let x = vec![1., -2., 3., 0.5];
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let ts = series(&[x, neg], 2.0);
    assert!(global_signal(&ts).iter().all(|v| *v == 0.0));
}

fn nuisance(cols: &[Vec<f64>]) -> NuisanceSet {
    let t = cols[0].len();
    let m = DMatrix::from_fn(t, cols.len(), |i, j| cols[j][i]);
    NuisanceSet::new((0..cols.len()).map(|k| format!("n{k}")).collect(), m).unwrap()
}

pub fn nuisance_examples() {
    let x = vec![1., 3., 2., 7., 4.];
    let out = nuisance_regress(&series(std::slice::from_ref(&x), 2.0), &nuisance(&[x])).unwrap();
    assert!(column(&out, 0).iter().all(|v| v.abs() < 1e-12));

    let col = vec![1., -1., 1., -1.];
    let reg = vec![1., 1., -1., -1.];
    let out = nuisance_regress(&series(std::slice::from_ref(&col), 2.0), &nuisance(&[reg])).unwrap();
    assert_slice(&column(&out, 0), &col, 1e-9);

    // closed form: slope = Sxy/Sxx, intercept = ȳ − slope·x̄
    let reg = [1., 2., 3.];
    let ys = [[1., 2., 3.], [2., 4., 5.]];
    let out = nuisance_regress(&series(&[ys[0].to_vec(), ys[1].to_vec()], 2.0), &nuisance(&[reg.to_vec()])).unwrap();
    for (j, y) in ys.iter().enumerate() {
        let xm = reg.iter().sum::<f64>() / 3.0;
        let ym = y.iter().sum::<f64>() / 3.0;
        let sxy: f64 = reg.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let sxx: f64 = reg.iter().map(|a| (a - xm) * (a - xm)).sum();
        let slope = sxy / sxx;
        let want: Vec<f64> = reg.iter().zip(y).map(|(a, b)| b - (ym - slope * xm) - slope * a).collect();
        assert_slice(&column(&out, j), &want, 1e-12);
    }
}

pub fn run_denoise_examples() {
    let ts = series(&[vec![1., 4., 2., 8.], vec![0., 1., 0., 3.]], 2.0);
    assert_eq!(run_denoise(&ts, &DenoiseConfig::default()).unwrap(), ts);
    let line = series(&[vec![1., 3., 5., 7.], vec![2., 1., 0., -1.]], 2.0);
    let cfg = DenoiseConfig {
        detrend_order: Some(1),
        ..DenoiseConfig::default()
    };
    let out = run_denoise(&line, &cfg).unwrap();
    assert!(out.data().iter().all(|v| v.abs() < 1e-12));
}

/// Shared additive confound on every region; detrend + global signal
/// regression should recover the correlations obtained from clean data.
pub fn shared_confound_is_removed() {
    let spec = SimulationSpec {
        regions: 8,
        timepoints: 2000,
        base_covariance: BaseCovariance::Block { n_blocks: 2, within_block_corr: 0.6 },
        ..SimulationSpec::noise_free()
    };
    let clean = Simulator::new(spec).unwrap().subject(0, 0).unwrap().0;
    let t = clean.n_timepoints();
    let confound: Vec<f64> = (0..t)
        .map(|i| {
            let x = i as f64;
            3.0 * (x / t as f64) + 2.0 * (2.0 * std::f64::consts::PI * 0.013 * x).sin()
        })
        .collect();
    let dirty_data = DMatrix::from_fn(t, clean.n_regions(), |i, j| clean.data()[(i, j)] + confound[i]);
    let dirty = clean.with_data(dirty_data).unwrap();
    let cfg = DenoiseConfig {
        detrend_order: Some(1),
        regress_global_signal: true,
        ..DenoiseConfig::default()
    };
    let want = pearson_matrix(&run_denoise(&clean, &cfg).unwrap()).unwrap();
    let got = pearson_matrix(&run_denoise(&dirty, &cfg).unwrap()).unwrap();
    let raw = pearson_matrix(&dirty).unwrap();
    let err = (got.values() - want.values()).amax();
    assert!(err < 0.05, "{err}");
    assert!((raw.values() - want.values()).amax() > 0.05, "confound too weak to matter");
}

// connectivity

fn r(x: &[f64], y: &[f64]) -> f64 {
    pearson_matrix(&series(&[x.to_vec(), y.to_vec()], 2.0)).unwrap().values()[(0, 1)]
}

pub fn pearson_examples() {
    assert!(close(r(&[1., 2., 3.], &[2., 4., 6.]), 1.0, 1e-15));
    assert!(close(r(&[1., 2., 3.], &[3., 2., 1.]), -1.0, 1e-15));
    // covariance / (std·std) from the definitions
    let (x, y) = ([1., 2., 3., 4.], [1., -1., 1., -1.]);
    let mx = x.iter().sum::<f64>() / 4.0;
    let my = y.iter().sum::<f64>() / 4.0;
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    let want = cov / (sx * sy);
    assert!(close(want, -2.0 / (5f64.sqrt() * 2.0), 1e-15));
    assert!(close(r(&x, &y), want, 1e-12));
    assert!(close(r(&x, &y), -0.4472, 1e-4));
    let err = pearson_matrix(&series(&[vec![1., 2., 3.], vec![4., 4., 4.]], 2.0)).unwrap_err();
    assert!(matches!(err, ConnectivityError::ZeroVarianceRegion { .. }));
}

fn cm(values: &[f64], n: usize) -> ConnectivityMatrix {
    ConnectivityMatrix::new(labels(n), DMatrix::from_row_slice(n, n, values)).unwrap()
}

pub fn threshold_examples() {
    let m = cm(&[1.0, 0.5, 0.5, 1.0], 2);
    assert_eq!(threshold_graph(&m, 0.5).unwrap().edge_count(), 0);
    let m = cm(&[1.0, -0.9, 0.2, -0.9, 1.0, 0.0, 0.2, 0.0, 1.0], 3);
    assert_eq!(threshold_graph(&m, -0.999).unwrap().edge_count(), 3);
}

pub fn density_examples() {
    let m = cm(&[1.0, 0.9, 0.5, 0.9, 1.0, 0.1, 0.5, 0.1, 1.0], 3);
    assert_eq!(density_threshold(&m, 1.0 / 3.0).unwrap().edges(), vec![(0, 1)]);
    assert_eq!(density_threshold(&m, 1.0).unwrap().edge_count(), 3);
    let tie = cm(&[1.0, 0.5, 0.5, 0.5, 1.0, 0.1, 0.5, 0.1, 1.0], 3);
    assert_eq!(density_threshold(&tie, 1.0 / 3.0).unwrap().edges(), vec![(0, 1)]);
    assert_eq!(edges_for_density(3, 1.0 / 3.0), 1);
}

// graph metrics

pub fn clustering_examples() {
    assert_slice(&clustering_coefficient(&k3()), &[1., 1., 1.], 0.0);
    assert_slice(&clustering_coefficient(&p3()), &[0., 0., 0.], 0.0);
    let g = k4_minus_edge();
    let got = clustering_coefficient(&g);
    assert!(close(got[0], 2.0 / 3.0, 1e-15));
    assert_slice(&got, &oracle(&g).clustering, 1e-15);
}

pub fn degree_examples() {
    assert_slice(&degree_centrality(&k3()), &[1., 1., 1.], 0.0);
    assert_slice(&degree_centrality(&p3()), &[0.5, 1.0, 0.5], 0.0);
    assert_slice(&degree_centrality(&star()), &[1.0, 1. / 3., 1. / 3., 1. / 3.], 1e-15);
}

pub fn closeness_examples() {
    assert_slice(&closeness_centrality(&p3()), &[2. / 3., 1.0, 2. / 3.], 1e-15);
    assert_slice(&closeness_centrality(&k3()), &[1., 1., 1.], 1e-15);
    assert_slice(&closeness_centrality(&graph(3, &[(0, 1)])), &[0.5, 0.5, 0.0], 1e-15);
}

pub fn betweenness_examples() {
    assert_slice(&betweenness_centrality(&p3()), &[0., 1., 0.], 1e-15);
    assert_slice(&betweenness_centrality(&star()), &[1., 0., 0., 0.], 1e-15);
    let c = betweenness_centrality(&c4());
    assert_slice(&c, &[1. / 6.; 4], 1e-15);
    assert_slice(&c, &oracle(&c4()).betweenness, 1e-15);
}

pub fn avg_neighbor_degree_examples() {
    assert_slice(&average_neighbor_degree(&p3()), &[2., 1., 2.], 0.0);
    assert_slice(&average_neighbor_degree(&k3()), &[2., 2., 2.], 0.0);
    assert_slice(&average_neighbor_degree(&star()), &[1., 3., 3., 3.], 0.0);
}

pub fn efficiency_examples() {
    for n in 2..=6 {
        let all: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        assert!(close(global_efficiency(&graph(n, &all)), 1.0, 1e-15));
    }
    assert!(close(global_efficiency(&p3()), 2.5 / 3.0, 1e-15));
    assert!(close(global_efficiency(&graph(3, &[(0, 1)])), 1.0 / 3.0, 1e-15));
    assert!(close(local_efficiency(&k3()), 1.0, 1e-15));
    assert_eq!(local_efficiency(&p3()), 0.0);
    let g = k4_minus_edge();
    assert!(close(local_efficiency(&g), oracle(&g).local_efficiency, 1e-15));
}

// features

pub fn feature_vector_examples() {
    assert_eq!(feature_names(&labels(3)).len(), 17);
    let g = BinaryGraph::from_edges(vec!["A".into(), "B".into(), "C".into()], &[(0, 1), (0, 2), (1, 2)]).unwrap();
    let fv = build_feature_vector(&node_metrics(&g), &graph_metrics(&g)).unwrap();
    assert_slice(
        fv.values(),
        &[1., 1., 1., 1., 1., 1., 1., 1., 1., 0., 0., 0., 2., 2., 2., 1., 1.],
        1e-15,
    );
}

fn vectors(ids: &[&str]) -> HashMap<String, FeatureVector> {
    let g = p3();
    let fv = build_feature_vector(&node_metrics(&g), &graph_metrics(&g)).unwrap();
    ids.iter().map(|id| (id.to_string(), fv.clone())).collect()
}

pub fn dataset_examples() {
    let m = DatasetManifest::new(entries(&[("s01", 0), ("s02", 0), ("s03", 1), ("s04", 1)]), names(), 2.0).unwrap();
    let ds = assemble_dataset(&m, &vectors(&["s01", "s02", "s03", "s04"])).unwrap();
    assert_eq!(ds.matrix().shape(), (4, 17));
    let err = assemble_dataset(&m, &vectors(&["s01", "s03", "s04"])).unwrap_err();
    assert!(matches!(err, FeatureError::MissingSubjectVector(ref s) if s == "s02"), "{err}");
    let mut v = vectors(&["s01", "s02", "s03", "s04"]);
    let fv = &v["s03"];
    let mut names = fv.names().to_vec();
    names.swap(0, 1);
    v.insert("s03".into(), FeatureVector::new(names, fv.values().to_vec()).unwrap());
    let err = assemble_dataset(&m, &v).unwrap_err();
    assert!(matches!(err, FeatureError::FeatureNameMismatch(_)), "{err}");
}

// classify

pub fn standardize_examples() {
    let s = standardize_fit(&DMatrix::from_column_slice(2, 1, &[1., 3.]));
    assert_eq!(s.mean, vec![2.0]);
    assert!(close(s.std[0], 2f64.sqrt(), 1e-15));
    let flat = DMatrix::from_column_slice(3, 1, &[5., 5., 5.]);
    let s = standardize_fit(&flat);
    assert_eq!(s.std, vec![MIN_STD]);
    assert!(s.transform(&flat).iter().all(|v| *v == 0.0));
    let raw = DMatrix::from_column_slice(4, 1, &[1., 4., -2., 7.]);
    let z = standardize_fit(&raw).transform(&raw);
    let s = standardize_fit(&z);
    assert!(close(s.mean[0], 0.0, 1e-9) && close(s.std[0], 1.0, 1e-9));
}

fn sign_problem() -> (DMatrix<f64>, Vec<u8>) {
    (DMatrix::from_column_slice(2, 1, &[-1.0, 1.0]), vec![0, 1])
}

fn linear(model: &TrainedModel) -> &LinearModel {
    match model {
        TrainedModel::Linear(m) => m,
        other => panic!("expected a linear model, got {other:?}"),
    }
}

pub fn logistic_examples() {
    let (x, y) = sign_problem();
    let cfg = ClassifierConfig {
        l2_lambda: 0.0,
        ..ClassifierConfig::default()
    };
    let m = train_logreg(&x, &y, &cfg).unwrap();
    assert!(linear(&m).weights[0] > 0.0);
    assert!(predict_score(&m, &[-1.0]).unwrap() < 0.5 && predict_score(&m, &[1.0]).unwrap() > 0.5);
    let err = train_logreg(&x, &[1, 1], &cfg).unwrap_err();
    assert!(matches!(err, ClassifyError::SingleClassTraining));
}

pub fn svm_examples() {
    let (x, y) = sign_problem();
    let cfg = ClassifierConfig {
        kind: ClassifierKind::LinearSvm,
        l2_lambda: 0.0,
        epochs: 2000,
        ..ClassifierConfig::default()
    };
    let m = train_linear_svm(&x, &y, &cfg).unwrap();
    let lm = linear(&m);
    assert!(lm.weights[0] > 0.0);
    for (xi, yi) in [(-1.0, -1.0), (1.0, 1.0)] {
        assert!(yi * lm.margin(&[xi]) >= 1.0 - 1e-12, "{}", lm.margin(&[xi]));
    }
}

pub fn svm_trace_non_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    use rand::Rng;
    let x = DMatrix::from_fn(10, 4, |_, _| rng.random_range(-2.0..2.0));
    let y: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
    let cfg = ClassifierConfig {
        kind: ClassifierKind::LinearSvm,
        learning_rate: 1e-3,
        ..ClassifierConfig::default()
    };
    let trace = fcgraph::classify::linear_loss_trace(&x, &y, &cfg).unwrap();
    assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

pub fn tree_examples() {
    assert_eq!(gini([2, 2]), 0.5);
    assert_eq!(gini([4, 0]), 0.0);
    let params = TreeParams {
        max_depth: None,
        features_per_split: 1,
    };
    let pure = DMatrix::from_column_slice(3, 1, &[1., 2., 3.]);
    let t = DecisionTree::grow(&pure, &[1, 1, 1], &[0, 1, 2], &params, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(t.root, TreeNode::Leaf { counts: [0, 3] });

    let x = DMatrix::from_column_slice(4, 1, &[1., 2., 3., 4.]);
    let y = [0, 0, 1, 1];
    let t = DecisionTree::grow(&x, &y, &[0, 1, 2, 3], &params, &mut ChaCha8Rng::seed_from_u64(0));
    match &t.root {
        TreeNode::Split { threshold, .. } => assert!(*threshold > 2.0 && *threshold < 3.0),
        leaf => panic!("expected a split, got {leaf:?}"),
    }
    assert!((0..4).all(|i| t.predict(&[x[(i, 0)]]) == y[i]));
}

pub fn predict_examples() {
    let lr = TrainedModel::Linear(LinearModel {
        kind: ClassifierKind::LogisticRegression,
        weights: vec![0.0, 0.0],
        bias: 0.0,
        standardizer: None,
    });
    assert_eq!(predict_score(&lr, &[3.0, -7.0]).unwrap(), 0.5);
    let svm = TrainedModel::Linear(LinearModel {
        kind: ClassifierKind::LinearSvm,
        weights: vec![1.0],
        bias: -1.0,
        standardizer: None,
    });
    assert_eq!(predict_score(&svm, &[3.0]).unwrap(), 2.0);
    let leaf = |c: [usize; 2]| DecisionTree {
        root: TreeNode::Leaf { counts: c },
    };
    let forest = TrainedModel::Forest(Forest {
        n_features: 1,
        trees: vec![leaf([0, 1]), leaf([0, 2]), leaf([1, 3]), leaf([5, 0])],
    });
    assert_eq!(predict_score(&forest, &[0.0]).unwrap(), 0.75);
}

struct ConstantScore;

impl Classifier for ConstantScore {
    type Model = ();

    fn fit(&self, _: &DMatrix<f64>, _: &[u8]) -> fcgraph::classify::Result<()> {
        Ok(())
    }

    fn score(&self, _: &(), _: &[f64]) -> fcgraph::classify::Result<f64> {
        Ok(0.0)
    }

    fn decision_point(&self) -> f64 {
        0.5
    }
}

pub fn constant_score_baseline() {
    let ds = LabeledDataset::new(
        (0..4).map(|i| format!("s{i}")).collect(),
        vec![0, 0, 0, 1],
        vec!["f".into()],
        DMatrix::from_column_slice(4, 1, &[1., 2., 3., 4.]),
    )
    .unwrap();
    let r = loocv_with(&ds, &ConstantScore, &DEFAULT_FPR_TARGETS).unwrap();
    assert_eq!(r.accuracy, 0.75);
}

pub fn separable_six_subjects() {
    let spec = SimulationSpec {
        n_per_group: 3,
        regions: 8,
        timepoints: 200,
        base_covariance: BaseCovariance::Block { n_blocks: 2, within_block_corr: 0.6 },
        ..SimulationSpec::noise_free()
    }
    .with_planted_block_effects(12, -0.5)
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    Simulator::new(spec).unwrap().cohort().unwrap().write(dir.path()).unwrap();
    let manifest = fcgraph::load_manifest(dir.path().join("manifest.txt")).unwrap();
    let cfg = PipelineConfig {
        threshold: ThresholdRule::Tau(0.3),
        ..PipelineConfig::default()
    };
    let ds = extract_dataset(&manifest, &cfg, false).unwrap().dataset;
    assert_eq!(ds.n_subjects(), 6);
    let r = fcgraph::loocv(&ds, &ClassifierConfig::default()).unwrap();
    assert_eq!(r.accuracy, 1.0);
    // every fold model is a logistic model trained on five rows
    let m = fold_model(&ds, &ClassifierConfig::default(), 0).unwrap();
    assert_eq!(m.kind(), ClassifierKind::LogisticRegression);
}

fn pts(p: &[(f64, f64)]) -> Vec<(f64, f64)> {
    p.to_vec()
}

fn roc(scores: &[f64], labels: &[u8]) -> Vec<(f64, f64)> {
    roc_points(scores, labels).unwrap().iter().map(|p| (p.fpr, p.tpr)).collect()
}

pub fn roc_examples() {
    assert_eq!(roc(&[0.9, 0.1], &[1, 0]), pts(&[(0., 0.), (0., 1.), (1., 1.)]));
    assert_eq!(roc(&[0.3; 4], &[1, 0, 1, 0]), pts(&[(0., 0.), (1., 1.)]));
    assert_eq!(
        roc(&[0.9, 0.4, 0.6, 0.1], &[1, 1, 0, 0]),
        pts(&[(0., 0.), (0., 0.5), (0.5, 0.5), (0.5, 1.), (1., 1.)])
    );
    let perfect = roc_points(&[0.9, 0.1], &[1, 0]).unwrap();
    assert_eq!(tpr_at_fpr(&perfect, &[0.1]).unwrap().get(0.1), Some(1.0));
    let flat = roc_points(&[0.3; 4], &[1, 0, 1, 0]).unwrap();
    assert_eq!(tpr_at_fpr(&flat, &[0.3]).unwrap().get(0.3), Some(0.0));
}

// simulate

pub fn simulate_examples() {
    let spec = SimulationSpec {
        regions: 4,
        timepoints: 5000,
        base_covariance: BaseCovariance::Block { n_blocks: 2, within_block_corr: 0.6 },
        ..SimulationSpec::noise_free()
    };
    let sim = Simulator::new(spec.clone()).unwrap();
    let ts = sim.subject(0, 0).unwrap().0;
    let err = (pearson_matrix(&ts).unwrap().values() - sim.covariance(0)).amax();
    assert!(err < 0.05, "{err}");
    assert_eq!(ts, fcgraph::generate_subject(&spec, 0, 0).unwrap());

    let spec = SimulationSpec {
        regions: 4,
        timepoints: 2000,
        base_covariance: BaseCovariance::Explicit(DMatrix::identity(4, 4)),
        thermal_sigma: 1.0,
        ..SimulationSpec::noise_free()
    };
    let c = pearson_matrix(&fcgraph::generate_subject(&spec, 0, 0).unwrap()).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!(i == j || c.values()[(i, j)].abs() < 0.1);
        }
    }
}

pub fn cohort_sizes() {
    for (n, total) in [(2, 4), (25, 50)] {
        let spec = SimulationSpec {
            n_per_group: n,
            regions: 4,
            timepoints: 20,
            ..SimulationSpec::default()
        };
        let c = fcgraph::generate_cohort(&spec).unwrap();
        assert_eq!(c.series.len(), total);
        assert_eq!(c.manifest.entries().iter().filter(|e| e.label == 1).count(), n);
    }
}

pub fn nuisance_set_column() {
    let base = nuisance(&[vec![1., 2., 3., 5.]]);
    let extended = base.with_column("x", &DVector::from_vec(vec![0., 1., 0., 1.])).unwrap();
    assert_eq!(extended.names().len(), 2);
}

pub const ALL: &[(&str, fn())] = &[
    ("parse 3-row file", parse_three_rows),
    ("ragged rows", ragged_rows),
    ("duplicate region label", duplicate_region_label),
    ("manifest validity", manifest_examples),
    ("cohort consistency", cohort_checks),
    ("detrend", detrend_examples),
    ("band-pass", bandpass_examples),
    ("global signal", global_signal_examples),
    ("nuisance regression", nuisance_examples),
    ("run_denoise identity and detrend", run_denoise_examples),
    ("shared confound removal", shared_confound_is_removed),
    ("Pearson hand values", pearson_examples),
    ("tau threshold", threshold_examples),
    ("density threshold", density_examples),
    ("clustering", clustering_examples),
    ("degree centrality", degree_examples),
    ("closeness", closeness_examples),
    ("betweenness", betweenness_examples),
    ("average neighbor degree", avg_neighbor_degree_examples),
    ("efficiency", efficiency_examples),
    ("feature vector", feature_vector_examples),
    ("dataset assembly", dataset_examples),
    ("standardization", standardize_examples),
    ("logistic regression", logistic_examples),
    ("linear SVM", svm_examples),
    ("SVM loss trace", svm_trace_non_increasing),
    ("decision tree", tree_examples),
    ("predict_score", predict_examples),
    ("constant-score LOOCV", constant_score_baseline),
    ("separable 6-subject LOOCV", separable_six_subjects),
    ("ROC and TPR lookup", roc_examples),
    ("simulate subject", simulate_examples),
    ("cohort sizes", cohort_sizes),
    ("nuisance set columns", nuisance_set_column),
];
