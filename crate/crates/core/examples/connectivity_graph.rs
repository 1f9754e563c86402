// Pearson connectivity and the two thresholding rules.

use fcgraph::connectivity::describe;
use fcgraph::{density_threshold, pearson_matrix, threshold_graph, Result, RoiTimeSeries};
use nalgebra::DMatrix;

pub fn run_example() -> Result<()> {
    // two pairs of coupled regions plus one loner
    let t = 120;
    let base = |i: usize, f: f64| (f * i as f64).sin();
    let data = DMatrix::from_fn(t, 5, |i, j| match j {
        0 => base(i, 0.31),
        1 => base(i, 0.31) + 0.3 * base(i, 1.7),
        2 => base(i, 0.53),
        3 => base(i, 0.53) + 0.3 * base(i, 2.3),
        _ => base(i, 0.97),
    });
    let labels = ["V1", "V2", "M1", "M2", "X"].map(String::from).to_vec();
    let ts = RoiTimeSeries::new("demo", labels, data, 2.0)?;

    let cm = pearson_matrix(&ts)?;
    println!("r(V1,V2) = {:.3}, r(V1,X) = {:.3}", cm.values()[(0, 1)], cm.values()[(0, 4)]);

    let g = threshold_graph(&cm, 0.5)?;
    println!("tau 0.5: {} edges {:?}", describe(&g), g.edges());
    assert_eq!(g.edges(), vec![(0, 1), (2, 3)]);

    let dense = density_threshold(&cm, 0.3)?;
    println!("density 0.3: {}", describe(&dense));
    assert_eq!(dense.edge_count(), 3);

    print!("{}", g.to_csv_string());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
