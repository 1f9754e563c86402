// Simulate, extract with and without denoising, classify and compare.

use fcgraph::pipeline::{classify_dataset, comparison_table, extract_dataset, ReportSummary};
use fcgraph::simulate::{BaseCovariance, SimulationSpec, Simulator};
use fcgraph::{DenoiseConfig, PipelineConfig, Result};

pub fn run_example() -> Result<()> {
    let spec = SimulationSpec {
        n_per_group: 6,
        regions: 8,
        timepoints: 200,
        base_covariance: BaseCovariance::Block { n_blocks: 2, within_block_corr: 0.6 },
        rng_seed: 3,
        ..SimulationSpec::default()
    }
    .with_planted_block_effects(8, -0.4)?;
    let dir = tempfile::tempdir().expect("temp dir");
    Simulator::new(spec)?.cohort()?.write(dir.path())?;
    let manifest = fcgraph::load_manifest(dir.path().join("manifest.txt"))?;

    let raw = PipelineConfig::default();
    let denoised = PipelineConfig {
        denoise: DenoiseConfig {
            detrend_order: Some(1),
            bandpass_hz: Some((0.01, 0.1)),
            regress_global_signal: true,
            extra_nuisance: None,
        },
        ..PipelineConfig::default()
    };

    let mut summaries = Vec::new();
    for (name, cfg) in [("raw", &raw), ("denoised", &denoised)] {
        let extraction = extract_dataset(&manifest, cfg, false)?;
        let mean_density = extraction.densities.iter().map(|(_, d)| d).sum::<f64>()
            / extraction.densities.len() as f64;
        let doc = classify_dataset(&extraction.dataset, cfg)?;
        println!("{name}: mean density {mean_density:.3}, accuracy {:.3}", doc.report.accuracy);
        summaries.push(ReportSummary {
            name: name.to_string(),
            accuracy: doc.report.accuracy,
            accuracy_dispersion: doc.report.accuracy_dispersion,
            tpr_at_fpr: doc.report.tpr_at_fpr.0.clone(),
        });
    }
    print!("{}", comparison_table(&summaries));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
