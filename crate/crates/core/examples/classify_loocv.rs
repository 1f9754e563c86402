// Leave-one-out evaluation of the three classifiers on a toy dataset.

use fcgraph::features::LabeledDataset;
use fcgraph::{loocv, ClassifierConfig, ClassifierKind, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 24;
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    // the first feature carries the class, the rest are noise
    let matrix = DMatrix::from_fn(n, 6, |i, j| {
        let noise: f64 = rng.random_range(-1.0..1.0);
        if j == 0 { 2.0 * labels[i] as f64 + noise } else { noise }
    });
    let ids = (0..n).map(|i| format!("s{i:02}")).collect();
    let names = (0..6).map(|j| format!("f{j}")).collect();
    let ds = LabeledDataset::new(ids, labels, names, matrix)?;

    for kind in ClassifierKind::ALL {
        let cfg = ClassifierConfig::with_kind(kind);
        let report = loocv(&ds, &cfg)?;
        println!("{kind}: accuracy {:.3} (+/- {:.3})", report.accuracy, report.accuracy_dispersion);
        print!("{}", report.tpr_table_text(kind.as_str()));
        assert!(report.accuracy >= 0.75);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
