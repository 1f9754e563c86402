//! Command-line front end shared by the `fcgraph` binary.
//!
//! Settings come from `--config` (key=value file), then `--set key=value`
//! overrides, then dedicated flags such as `--seed` and `--classifier`.
//! Later sources win. Exit status is 0 on success, 2 for I/O failures and
//! 1 for everything else.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::classify::ClassifierKind;
use crate::features::LabeledDataset;
use crate::ingest::load_manifest;
use crate::pipeline::{self, PipelineConfig, PipelineError, RunMeta};
use crate::simulate::{SimulateError, SimulationSpec, Simulator};
use crate::{kv, Error};

#[derive(Debug, Parser)]
#[command(name = "fcgraph", version, about = "Connectivity-graph features and LOOCV classification")]
pub struct Cli {
    /// Worker threads for per-subject and per-fold stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// RNG seed; overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// key=value config file (pipeline config, or simulation spec for `simulate`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set bandpass=0.01,0.1`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic two-group cohort.
    Simulate {
        /// Simulation spec file; falls back to `--config`.
        spec: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Build the labeled feature dataset from a manifest.
    Extract {
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Skip failing subjects instead of stopping at the first one.
        #[arg(long)]
        keep_going: bool,
    },
    /// Leave-one-out evaluation of a feature dataset.
    Classify {
        dataset: PathBuf,
        /// Report JSON path; the TPR table goes next to it as `.tpr.txt`.
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        classifier: Option<ClassifierKind>,
    },
    /// Side-by-side comparison of report files.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Also write the table here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Lib(Error::Pipeline(PipelineError::Io { .. }))
            | CliError::Lib(Error::Simulate(SimulateError::Io { .. }))
            | CliError::Lib(Error::Ingest(crate::IngestError::Io { .. }))
            | CliError::Lib(Error::Ingest(crate::IngestError::MissingFile { .. })) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { spec, out } => cmd_simulate(cli, spec.as_deref(), out),
        Command::Extract {
            manifest,
            out,
            keep_going,
        } => cmd_extract(cli, manifest, out, *keep_going),
        Command::Classify {
            dataset,
            out,
            classifier,
        } => cmd_classify(cli, dataset, out, *classifier),
        Command::Report { reports, out } => cmd_report(reports, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Config file text followed by `--set` lines, parsed as one map.
fn merged_map(cli: &Cli, file: Option<&Path>) -> Result<std::collections::BTreeMap<String, String>, CliError> {
    let mut map = match file {
        Some(p) => kv::parse(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => Default::default(),
    };
    for item in &cli.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {item:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn pipeline_config(cli: &Cli, classifier: Option<ClassifierKind>) -> Result<PipelineConfig, CliError> {
    let mut cfg = PipelineConfig::default();
    cfg.apply_map(&merged_map(cli, cli.config.as_deref())?)?;
    if let Some(kind) = classifier {
        cfg.classifier.kind = kind;
    }
    if let Some(seed) = cli.seed {
        cfg.classifier.rng_seed = seed;
    }
    Ok(cfg)
}

fn cmd_simulate(cli: &Cli, spec_path: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let path = spec_path.or(cli.config.as_deref());
    let mut map = merged_map(cli, path)?;
    if let Some(seed) = cli.seed {
        map.remove("seed");
        map.insert("rng_seed".into(), seed.to_string());
    }
    let spec = SimulationSpec::from_map(&map)?;
    let cohort = Simulator::new(spec.clone())?.cohort()?;
    cohort.write(out)?;
    let meta = RunMeta::new("simulate", &spec.to_kv_text(), spec.rng_seed);
    write(&out.join("run_meta.json"), &to_json(&meta))?;
    println!(
        "wrote {} subjects ({} regions x {} timepoints) to {}",
        cohort.series.len(),
        spec.regions,
        spec.timepoints,
        out.display()
    );
    if cohort.ground_truth.group1_psd_repaired {
        println!("note: group 1 covariance was repaired to PSD; see ground_truth.json for realized deltas");
    }
    Ok(())
}

fn cmd_extract(cli: &Cli, manifest_path: &Path, out: &Path, keep_going: bool) -> Result<(), CliError> {
    let cfg = pipeline_config(cli, None)?;
    let manifest = load_manifest(manifest_path).map_err(Error::from)?;
    let extraction = pipeline::extract_dataset(&manifest, &cfg, keep_going)?;
    for (id, msg) in &extraction.failures {
        eprintln!("skipped {id}: {msg}");
    }
    extraction.dataset.write_csv(out).map_err(Error::from)?;
    let meta = RunMeta::new("extract", &cfg.to_kv_text(), cfg.classifier.rng_seed);
    write(&out.with_extension("meta.json"), &to_json(&meta))?;
    Ok(())
}

fn cmd_classify(cli: &Cli, dataset_path: &Path, out: &Path, kind: Option<ClassifierKind>) -> Result<(), CliError> {
    let cfg = pipeline_config(cli, kind)?;
    let ds = LabeledDataset::read_csv(dataset_path).map_err(Error::from)?;
    let doc = pipeline::classify_dataset(&ds, &cfg)?;
    write(out, &doc.to_json())?;
    write(
        &out.with_extension("tpr.txt"),
        &doc.report.tpr_table_text(cfg.classifier.kind.as_str()),
    )?;
    Ok(())
}

fn cmd_report(paths: &[PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    let summaries = paths
        .iter()
        .map(pipeline::load_report_summary)
        .collect::<Result<Vec<_>, _>>()?;
    let table = pipeline::comparison_table(&summaries);
    print!("{table}");
    if let Some(out) = out {
        write(out, &table)?;
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}
