//! Classical MDS on exact distances recovers the layout up to a rigid motion;
//! on hop-path distances across the C gap it bends the field.

use cbmds::mds::classical_mds_with_spectrum;
use cbmds::network::shortest_path_matrix;
use cbmds::{
    build_network, generate_deployment, procrustes_rigid, DistanceMatrix, FieldSpec, Shape,
};

fn main() {
    let field = generate_deployment(&FieldSpec::random(Shape::CShape, 161, 4)).unwrap();
    let truth = &field.positions;

    let exact = classical_mds_with_spectrum(&DistanceMatrix::euclidean(truth), 2).unwrap();
    let fit = procrustes_rigid(&exact.map.coords, truth).unwrap();
    println!(
        "exact distances: eigenvalues {:.1?}, rms after rigid fit {:.2e}",
        exact.eigenvalues,
        (fit.residual / truth.len() as f64).sqrt()
    );

    let net = build_network(&field, 2.0, 0.0, 0).unwrap();
    let all: Vec<_> = (0..net.len()).collect();
    let paths = classical_mds_with_spectrum(&shortest_path_matrix(&net, &all).unwrap(), 2).unwrap();
    let fit = procrustes_rigid(&paths.map.coords, truth).unwrap();
    println!(
        "hop-path distances: eigenvalues {:.1?}, rms after rigid fit {:.3}",
        paths.eigenvalues,
        (fit.residual / truth.len() as f64).sqrt()
    );
}
