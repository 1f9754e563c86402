// Parse a time-series CSV and a manifest, then check the cohort is consistent.

use fcgraph::ingest::{parse_manifest, parse_time_series};
use fcgraph::{check_cohort, Result};

pub fn run_example() -> Result<()> {
    let a = parse_time_series("PCC,mPFC,LIPL\n0.1,0.3,0.2\n0.4,0.1,0.0\n-0.2,0.2,0.5\n", "s01", 2.0)?;
    let b = parse_time_series("PCC,mPFC,LIPL\r\n1,2,3\r\n2,2,2\r\n3,1,0\r\n4,0,1\r\n", "s02", 2.0)?;
    println!("{}: {} timepoints x {} regions", a.subject_id(), a.n_timepoints(), a.n_regions());

    let summary = check_cohort(&[a.clone(), b])?;
    assert_eq!(summary.regions, 3);
    assert_eq!((summary.min_timepoints, summary.max_timepoints), (3, 4));
    println!("cohort: {summary:?}");

    // region sets must agree across subjects
    let odd = parse_time_series("PCC,LIPL\n0,1\n1,0\n", "s03", 2.0)?;
    let err = check_cohort(&[a, odd]).unwrap_err();
    println!("mismatched cohort rejected: {err}");

    let manifest = parse_manifest(
        "tr=2.0\nlabel0=control\nlabel1=patient\ns01,0,s01.csv\ns02,1,s02.csv\ns03,0,s03.csv\ns04,1,s04.csv\n",
        std::path::Path::new("data"),
    )?;
    assert_eq!(manifest.len(), 4);
    assert_eq!(manifest.label_of("s02"), Some(1));
    println!("manifest labels: {:?}", manifest.label_names());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
