//! Both pipelines on the same C-shaped network with the same anchors.

use cbmds::localization::{cb_mds_detailed, truth_map, PositionMap};
use cbmds::{
    build_network, generate_deployment, mds_map_baseline, mean_normalized_error, FieldSpec, Shape,
};

fn main() {
    let field = generate_deployment(&FieldSpec::random(Shape::CShape, 161, 4)).unwrap();
    let truth_pts = field.positions.clone();
    for radio in [1.5, 2.0, 2.5] {
        let Ok(net) = build_network(&field, radio, 0.0, 0) else {
            println!("R = {radio}: disconnected");
            continue;
        };
        let truth = truth_map(&net);
        let anchors: PositionMap = [3, 50, 100, 150].iter().map(|&i| (i, truth_pts[i])).collect();
        let base = mds_map_baseline(&net, &anchors).unwrap();
        let base_err = mean_normalized_error(&base, &truth, radio).unwrap();
        print!("R = {radio}: MDS-MAP {base_err:.3}");
        for k in [5, 7, 10, 15] {
            match cb_mds_detailed(&net, k, &anchors, 7) {
                Ok(run) => {
                    let err = mean_normalized_error(&run.positions, &truth, radio).unwrap();
                    print!("  k={k} {err:.3}");
                }
                Err(e) => print!("  k={k} ({e})"),
            }
        }
        println!();
    }
}
