//! A reduced Monte-Carlo sweep written to a directory, then summarized.
//!
//! cargo run --release --example sweep -- out/

use cbmds::harness::{summarize, sweep_to_dir, ExperimentConfig};
use cbmds::{FieldSpec, Shape};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "sweep-out".into());
    let cfg = ExperimentConfig {
        topologies: vec![FieldSpec::random(Shape::CShape, 161, 0)],
        radio_ranges: vec![1.5, 2.0, 2.5],
        cluster_counts: vec![7, 15],
        anchor_counts: vec![4],
        trials: 10,
        ..ExperimentConfig::default()
    };
    let results = sweep_to_dir(&cfg, out.as_ref()).unwrap();
    println!("{} rows in {out}/raw.csv", results.len());
    for row in summarize(&results) {
        println!(
            "R {:<4} {:<7} k {:<3} conn {:>5.2}  err/R {:.3} +- {:.3}",
            row.radio_range,
            row.algorithm.name(),
            row.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            row.connectivity_mean,
            row.error_mean,
            row.error_std
        );
    }
}
