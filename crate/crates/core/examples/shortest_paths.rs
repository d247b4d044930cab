//! Builds a unit-disk network and compares hop-path distances with the true
//! Euclidean distances, with and without ranging noise.

use cbmds::network::{average_connectivity, shortest_path_matrix};
use cbmds::{build_network, generate_deployment, FieldSpec, Shape};

fn main() {
    let field = generate_deployment(&FieldSpec::random(Shape::CShape, 161, 4)).unwrap();
    for noise in [0.0, 0.05] {
        let net = build_network(&field, 2.0, noise, 9).expect("connected");
        let all: Vec<_> = (0..net.len()).collect();
        let d = shortest_path_matrix(&net, &all).unwrap();
        let (mut sum, mut worst, mut pairs) = (0.0, 0.0f64, 0);
        for i in 0..net.len() {
            for j in i + 1..net.len() {
                let e = (net.position(i) - net.position(j)).norm();
                let ratio = d.get(i, j) / e;
                sum += ratio;
                worst = worst.max(ratio);
                pairs += 1;
            }
        }
        println!(
            "noise {noise:.2}: {} edges, connectivity {:.2}, path/true mean {:.3}, max {:.3}",
            net.edge_count(),
            average_connectivity(&net),
            sum / pairs as f64,
            worst
        );
    }
}
