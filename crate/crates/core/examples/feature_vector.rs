// Turn a graph into the fixed-order feature vector and a labeled dataset.

use std::collections::HashMap;
use std::path::Path;

use fcgraph::connectivity::BinaryGraph;
use fcgraph::ingest::parse_manifest;
use fcgraph::{assemble_dataset, build_feature_vector, graph_metrics, node_metrics, Result};

pub fn run_example() -> Result<()> {
    let labels = ["L", "M", "N"].map(String::from).to_vec();
    let path = BinaryGraph::from_edges(labels.clone(), &[(0, 1), (1, 2)])?;
    let triangle = BinaryGraph::from_edges(labels, &[(0, 1), (1, 2), (0, 2)])?;

    let fv = |g: &BinaryGraph| build_feature_vector(&node_metrics(g), &graph_metrics(g));
    let a = fv(&path)?;
    let b = fv(&triangle)?;
    assert_eq!(a.len(), 5 * 3 + 2);
    println!("{} features: {:?} ...", a.len(), &a.names()[..4]);
    println!("closeness of M: path {:?}, triangle {:?}", a.get("M_closeness"), b.get("M_closeness"));

    let manifest = parse_manifest("p1,0,p1.csv\np2,0,p2.csv\nt1,1,t1.csv\nt2,1,t2.csv\n", Path::new("."))?;
    let vectors = HashMap::from([
        ("p1".to_string(), a.clone()),
        ("p2".to_string(), a),
        ("t1".to_string(), b.clone()),
        ("t2".to_string(), b),
    ]);
    let ds = assemble_dataset(&manifest, &vectors)?;
    print!("{}", ds.to_csv_string());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
