//! k-means clustering followed by cluster extension; reports gateways and
//! pairwise overlaps that the merge step relies on.

use cbmds::localization::MIN_COMMON_NODES;
use cbmds::{build_network, extend_clusters, generate_deployment, kmeans_clusters, FieldSpec, Shape};

fn main() {
    let field = generate_deployment(&FieldSpec::random(Shape::CShape, 161, 4)).unwrap();
    let net = build_network(&field, 2.0, 0.0, 0).unwrap();
    let base = kmeans_clusters(net.positions(), 7, 42).unwrap();
    let ext = extend_clusters(&base, &net);
    for c in 0..ext.k() {
        println!(
            "cluster {c}: head {:>3}, {:>2} core, {:>2} extended",
            ext.heads[c],
            ext.cores[c].len(),
            ext.extended[c].len()
        );
    }
    println!("gateways: {}", ext.gateways().count());
    for a in 0..ext.k() {
        for b in a + 1..ext.k() {
            let shared = ext.extended[a]
                .iter()
                .filter(|n| ext.extended[b].binary_search(n).is_ok())
                .count();
            if shared >= MIN_COMMON_NODES {
                println!("  {a} <-> {b}: {shared} common nodes");
            }
        }
    }
}
