//! Runs the demo pipeline and writes the comparison figure.
//!
//! cargo run --release --example render_svg -- figure.svg

use cbmds::harness::{run_demo, DemoConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "figure.svg".into());
    let out = run_demo(&DemoConfig::default()).unwrap();
    std::fs::write(&path, &out.svg).unwrap();
    println!(
        "{} nodes, k = {}, MDS-MAP {:.3}, CB-MDS {:.3}; wrote {path}",
        out.network.len(),
        out.k_used,
        out.mds_map_error,
        out.cb_mds_error
    );
}
