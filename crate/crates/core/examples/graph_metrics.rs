// Per-node metrics and the two efficiencies on a small hand-built graph.

use fcgraph::connectivity::BinaryGraph;
use fcgraph::{graph_metrics, node_metrics, Result};

pub fn run_example() -> Result<()> {
    // triangle 0-1-2 with a tail 2-3-4
    let labels = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
    let g = BinaryGraph::from_edges(labels, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)])?;

    let table = node_metrics(&g);
    for (name, values) in table.columns() {
        let row: Vec<String> = values.iter().map(|v| format!("{v:.3}")).collect();
        println!("{name:>20}: {}", row.join("  "));
    }
    assert!((table.clustering[0] - 1.0).abs() < 1e-12);
    assert!((table.clustering[2] - 1.0 / 3.0).abs() < 1e-12);
    assert!((table.betweenness[2] - 4.0 / 6.0).abs() < 1e-12);

    let pair = graph_metrics(&g);
    println!("local efficiency {:.4}, global efficiency {:.4}", pair.local_efficiency, pair.global_efficiency);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
