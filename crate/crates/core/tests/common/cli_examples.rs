//! Command-line worked examples, run through the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fcgraph::features::LabeledDataset;
use fcgraph::simulate::SimulationSpec;

fn fcgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcgraph"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_spec(dir: &Path, spec: &SimulationSpec) -> PathBuf {
    let path = dir.join("spec.txt");
    std::fs::write(&path, spec.to_kv_text()).unwrap();
    path
}

fn small_spec() -> SimulationSpec {
    SimulationSpec {
        n_per_group: 2,
        regions: 3,
        timepoints: 80,
        base_covariance: fcgraph::simulate::BaseCovariance::Block { n_blocks: 1, within_block_corr: 0.5 },
        ..SimulationSpec::default()
    }
}

pub fn simulate_writes_cohort_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &small_spec());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = fcgraph(&["simulate", s(&spec), "--out", s(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csvs = std::fs::read_dir(&a)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 4);
    for name in ["g0_s000.csv", "g1_s001.csv", "manifest.txt", "ground_truth.json", "run_meta.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

pub fn simulate_into_unwritable_location_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &small_spec());
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "not a directory").unwrap();
    let target = blocker.join("cohort");
    let o = fcgraph(&["simulate", s(&spec), "--out", s(&target)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(s(&blocker)), "{}", stderr(&o));
}

pub fn invalid_spec_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.txt");
    std::fs::write(&spec, "spike_rate=3\n").unwrap();
    let o = fcgraph(&["simulate", s(&spec), "--out", s(&dir.path().join("c"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("spike_rate"));
}

pub fn extract_small_cohort_gives_4_by_17() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &small_spec());
    let cohort = dir.path().join("cohort");
    assert!(fcgraph(&["simulate", s(&spec), "--out", s(&cohort)]).status.success());
    let out = dir.path().join("features.csv");
    let o = fcgraph(&["extract", s(&cohort.join("manifest.txt")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ds = LabeledDataset::read_csv(&out).unwrap();
    assert_eq!((ds.n_subjects(), ds.n_features()), (4, 17));
    assert!(dir.path().join("features.meta.json").exists());
}

pub fn constant_region_is_reported_with_subject_and_region() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::from("A,B,C\n");
    for t in 0..20 {
        let t = t as f64;
        rows.push_str(&format!("{},{},5\n", t.sin(), (t * 0.7).cos()));
    }
    std::fs::write(dir.path().join("flat.csv"), &rows).unwrap();
    let mut ok = String::from("A,B,C\n");
    for t in 0..20 {
        let t = t as f64;
        ok.push_str(&format!("{},{},{}\n", t.sin(), (t * 0.7).cos(), (t * 1.3).sin()));
    }
    for name in ["a", "b", "c"] {
        std::fs::write(dir.path().join(format!("{name}.csv")), &ok).unwrap();
    }
    std::fs::write(
        dir.path().join("manifest.txt"),
        "a,0,a.csv\nflat,0,flat.csv\nb,1,b.csv\nc,1,c.csv\n",
    )
    .unwrap();
    let out = dir.path().join("features.csv");
    let o = fcgraph(&["extract", s(&dir.path().join("manifest.txt")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("flat") && err.contains("\"C\"") && err.contains("zero variance"), "{err}");

    let o = fcgraph(&["extract", s(&dir.path().join("manifest.txt")), "--out", s(&out), "--keep-going"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(LabeledDataset::read_csv(&out).unwrap().n_subjects(), 3);
}

fn separable_cohort(dir: &Path) -> PathBuf {
    // every within-block edge drops from 0.6 to 0.1 in group 1
    let spec = SimulationSpec {
        n_per_group: 5,
        regions: 8,
        timepoints: 200,
        base_covariance: fcgraph::simulate::BaseCovariance::Block { n_blocks: 2, within_block_corr: 0.6 },
        ..SimulationSpec::noise_free()
    }
    .with_planted_block_effects(12, -0.5)
    .unwrap();
    let spec_path = write_spec(dir, &spec);
    let cohort = dir.join("cohort");
    assert!(fcgraph(&["simulate", s(&spec_path), "--out", s(&cohort)]).status.success());
    let features = dir.join("features.csv");
    let o = fcgraph(&["extract", s(&cohort.join("manifest.txt")), "--out", s(&features)]);
    assert!(o.status.success(), "{}", stderr(&o));
    features
}

pub fn separable_cohort_classifies_perfectly_and_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let features = separable_cohort(dir.path());
    let config = dir.path().join("pipeline.txt");
    std::fs::write(&config, "classifier=logistic_regression\nthreshold=tau:0.3\n").unwrap();

    let report = dir.path().join("lr.json");
    let o = fcgraph(&["classify", s(&features), "--out", s(&report), "--config", s(&config)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["accuracy"], 1.0);
    assert_eq!(doc["classifier"]["kind"], "logistic_regression");
    assert!(doc["run_meta"]["config_hash"].as_str().unwrap().len() == 64);
    assert!(dir.path().join("lr.tpr.txt").exists());

    let report = dir.path().join("svm.json");
    let o = fcgraph(&[
        "classify",
        s(&features),
        "--out",
        s(&report),
        "--config",
        s(&config),
        "--classifier",
        "linear_svm",
        "--seed",
        "9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["classifier"]["kind"], "linear_svm");
    assert_eq!(doc["run_meta"]["seed"], 9);
}

pub fn three_subject_dataset_is_underpopulated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    std::fs::write(&path, "subject_id,label,f\na,0,1.0\nb,0,2.0\nc,1,3.0\n").unwrap();
    let o = fcgraph(&["classify", s(&path), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("class 1") && stderr(&o).contains("at least 2"), "{}", stderr(&o));
}

pub fn report_tables() {
    let dir = tempfile::tempdir().unwrap();
    let features = separable_cohort(dir.path());
    let mut reports = Vec::new();
    for kind in ["logistic_regression", "linear_svm", "random_forest"] {
        let r = dir.path().join(format!("{kind}.json"));
        let o = fcgraph(&["classify", s(&features), "--out", s(&r), "--classifier", kind, "--set", "trees=10"]);
        assert!(o.status.success(), "{}", stderr(&o));
        reports.push(r);
    }
    let o = fcgraph(&["report", s(&reports[0]), s(&reports[1]), s(&reports[2])]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0].split_whitespace().count(), 4);
    let rows: Vec<&str> = lines[1..5].iter().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(rows, ["0.1", "0.15", "0.2", "0.3"]);

    let o = fcgraph(&["report", s(&reports[0])]);
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().next().unwrap().split_whitespace().count(), 2);

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"accuracy": 0.5, "accuracy_dispersion": 0.1}"#).unwrap();
    let o = fcgraph(&["report", s(&reports[0]), s(&broken)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(s(&broken)) && stderr(&o).contains("malformed report"));
}

pub const ALL: &[(&str, fn())] = &[
    ("simulate writes a repeatable cohort", simulate_writes_cohort_and_is_repeatable),
    ("unwritable output exits 2", simulate_into_unwritable_location_exits_2),
    ("invalid spec exits 1", invalid_spec_exits_1),
    ("extract 4 subjects, R=3 -> 4x17", extract_small_cohort_gives_4_by_17),
    ("constant region names subject and region", constant_region_is_reported_with_subject_and_region),
    ("separable cohort, --classifier override", separable_cohort_classifies_perfectly_and_flag_overrides_config),
    ("3-subject dataset is underpopulated", three_subject_dataset_is_underpopulated),
    ("report tables and malformed report", report_tables),
];
